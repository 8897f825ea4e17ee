// WebSocket client for the confidence stream.  The feed owns connection
// and reconnection only; message content is forwarded untouched.  Nothing
// a peer sends can make the feed close the socket: malformed frames are
// the state reducer's concern, and a dropped connection is retried until
// stop() is called.

export interface SocketLike {
  onopen: (() => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
  close(): void;
}

export interface FeedOptions {
  makeSocket?: (url: string) => SocketLike;
  reconnectDelayMs?: number;
  schedule?: (fn: () => void, delayMs: number) => void;
}

export class FrameFeed {
  private readonly url: string;
  private readonly onText: (text: string) => void;
  private readonly makeSocket: (url: string) => SocketLike;
  private readonly reconnectDelayMs: number;
  private readonly schedule: (fn: () => void, delayMs: number) => void;
  private socket: SocketLike | null = null;
  private stopped = false;

  constructor(url: string, onText: (text: string) => void, opts: FeedOptions = {}) {
    this.url = url;
    this.onText = onText;
    this.makeSocket = opts.makeSocket ?? ((u) => new WebSocket(u) as unknown as SocketLike);
    this.reconnectDelayMs = opts.reconnectDelayMs ?? 1000;
    this.schedule = opts.schedule ?? ((fn, ms) => void setTimeout(fn, ms));
    this.connect();
  }

  stop(): void {
    this.stopped = true;
    this.socket?.close();
    this.socket = null;
  }

  private connect(): void {
    if (this.stopped) {
      return;
    }
    let socket: SocketLike;
    try {
      socket = this.makeSocket(this.url);
    } catch {
      this.retry();
      return;
    }
    this.socket = socket;
    socket.onmessage = (ev) => {
      // Binary payloads are off-schema; stringifying lets the reducer
      // count them as malformed instead of special-casing them here.
      this.onText(typeof ev.data === "string" ? ev.data : String(ev.data));
    };
    socket.onclose = () => {
      this.socket = null;
      this.retry();
    };
    socket.onerror = () => {
      // The close event that follows drives the reconnect.
    };
  }

  private retry(): void {
    if (this.stopped) {
      return;
    }
    this.schedule(() => this.connect(), this.reconnectDelayMs);
  }
}
