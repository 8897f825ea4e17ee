// Page wiring: connect the frame feed to the state reducer and drive a
// display-refresh render loop over immutable state snapshots.

import { drawScene } from "./draw";
import { FrameFeed } from "./feed";
import { buildScene } from "./scene";
import { ingest, initialState, tick } from "./state";

/** Stream endpoint; overridable per page load with ?ws=<url> or
 * ?host=<host:port>. */
function feedUrl(): string {
  const params = new URLSearchParams(window.location.search);
  const explicit = params.get("ws");
  if (explicit !== null) {
    return explicit;
  }
  const scheme = window.location.protocol === "https:" ? "wss:" : "ws:";
  const host = params.get("host") ?? window.location.host;
  return `${scheme}//${host}/ws/confidence`;
}

function start(): void {
  const canvas = document.getElementById("face") as HTMLCanvasElement | null;
  const ctx = canvas?.getContext("2d");
  if (!canvas || !ctx) {
    return;
  }

  let state = initialState();
  const feed = new FrameFeed(feedUrl(), (text) => {
    state = ingest(state, text, performance.now());
  });
  window.addEventListener("beforeunload", () => feed.stop());

  const loop = (): void => {
    const now = performance.now();
    state = tick(state, now);
    const dpr = window.devicePixelRatio || 1;
    const w = Math.max(1, Math.round(canvas.clientWidth * dpr));
    const h = Math.max(1, Math.round(canvas.clientHeight * dpr));
    if (canvas.width !== w || canvas.height !== h) {
      canvas.width = w;
      canvas.height = h;
    }
    try {
      drawScene(ctx, w, h, buildScene(state, now, w, h));
    } catch {
      // A bad draw must never take the page down; next frame retries.
    }
    window.requestAnimationFrame(loop);
  };
  window.requestAnimationFrame(loop);
}

window.addEventListener("load", start);
