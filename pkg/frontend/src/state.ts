// Display state machine.  Frame ingestion is a pure reducer: the same
// (text, wall-clock) sequence always yields the same state sequence, and
// the render loop works off one immutable snapshot at a time.
//
// Two clocks are in play.  Glow hold is measured on engine time (the
// frames' own t_ms) so the walk is reproducible; tweening and liveness
// are measured on the local wall clock the caller passes in.

import { parseFrame, type Mode, type WireFrame } from "./frames";

export type Connection = "connecting" | "live" | "lost";

export const GLOW_THRESHOLD = 0.75;
export const GLOW_HOLD_MS = 2000;
export const TWEEN_MS = 100;
export const LOST_AFTER_MS = 2000;
export const NEUTRAL_C = 0.5;

export interface DisplayState {
  /** Tween target: confidence from the latest accepted frame. */
  readonly cDisplay: number;
  readonly mode: Mode;
  /** Beat phase reported by the latest accepted frame. */
  readonly beatPhase: number;
  readonly tempo: number;
  readonly glowActive: boolean;
  readonly connection: Connection;
  readonly malformedCount: number;
  readonly framesAccepted: number;
  /** Engine time of the latest accepted frame. */
  readonly frameTms: number;
  /** Engine time the current above-threshold run began, if any. */
  readonly glowSinceTms: number | null;
  readonly tweenFromC: number;
  readonly tweenStartMs: number;
  readonly lastFrameWallMs: number;
}

export function initialState(): DisplayState {
  return {
    cDisplay: NEUTRAL_C,
    mode: "truthful",
    beatPhase: 0,
    tempo: 120,
    glowActive: false,
    connection: "connecting",
    malformedCount: 0,
    framesAccepted: 0,
    frameTms: 0,
    glowSinceTms: null,
    tweenFromC: NEUTRAL_C,
    tweenStartMs: -Infinity,
    lastFrameWallMs: -Infinity,
  };
}

/** Feed one raw socket message; malformed input only bumps the counter. */
export function ingest(state: DisplayState, text: string, nowMs: number): DisplayState {
  const frame = parseFrame(text);
  if (frame === null) {
    return { ...state, malformedCount: state.malformedCount + 1 };
  }
  return applyFrame(state, frame, nowMs);
}

export function applyFrame(state: DisplayState, frame: WireFrame, nowMs: number): DisplayState {
  let glowSince = state.glowSinceTms;
  if (frame.c > GLOW_THRESHOLD) {
    // Engine time moving backwards means a new session; restart the run.
    if (glowSince === null || frame.t_ms < glowSince) {
      glowSince = frame.t_ms;
    }
  } else {
    glowSince = null;
  }
  return {
    cDisplay: frame.c,
    mode: frame.mode,
    beatPhase: frame.beat_phase,
    tempo: frame.tempo,
    glowActive: glowSince !== null && frame.t_ms - glowSince >= GLOW_HOLD_MS,
    connection: "live",
    malformedCount: state.malformedCount,
    framesAccepted: state.framesAccepted + 1,
    frameTms: frame.t_ms,
    glowSinceTms: glowSince,
    tweenFromC: renderedC(state, nowMs),
    tweenStartMs: nowMs,
    lastFrameWallMs: nowMs,
  };
}

/** Advance liveness: a live feed that stays silent too long is lost and
 * the face slides back to neutral, then freezes. */
export function tick(state: DisplayState, nowMs: number): DisplayState {
  if (state.connection !== "live" || nowMs - state.lastFrameWallMs <= LOST_AFTER_MS) {
    return state;
  }
  return {
    ...state,
    connection: "lost",
    glowActive: false,
    glowSinceTms: null,
    cDisplay: NEUTRAL_C,
    tweenFromC: renderedC(state, nowMs),
    tweenStartMs: nowMs,
  };
}

/** Confidence to draw right now: 2 Hz updates tween over TWEEN_MS so the
 * expression appears continuous. */
export function renderedC(state: DisplayState, nowMs: number): number {
  const dt = nowMs - state.tweenStartMs;
  if (!(dt < TWEEN_MS)) {
    return state.cDisplay;
  }
  const t = Math.max(0, dt) / TWEEN_MS;
  return state.tweenFromC + (state.cDisplay - state.tweenFromC) * t;
}

/** Beat phase to draw right now, extrapolated between frames at the
 * reported tempo; frozen unless the feed is live. */
export function beatPhaseAt(state: DisplayState, nowMs: number): number {
  if (state.connection !== "live") {
    return state.beatPhase;
  }
  const beatMs = 60000 / state.tempo;
  const elapsed = Math.max(0, nowMs - state.lastFrameWallMs);
  const phase = state.beatPhase + elapsed / beatMs;
  return phase - Math.floor(phase);
}
