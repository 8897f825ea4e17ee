// Client-side guard for the confidence wire schema:
//
//   {"t_ms":int, "c":float, "mode":"truthful"|"deceptive"|"absent",
//    "tempo":float, "beat_phase":float}
//
// Anything that deviates is rejected as a unit; a malformed frame must
// never take the display down, so the parser returns null instead of
// throwing.

export type Mode = "truthful" | "deceptive" | "absent";

export interface WireFrame {
  t_ms: number;
  c: number;
  mode: Mode;
  tempo: number;
  beat_phase: number;
}

const MODES: ReadonlySet<string> = new Set(["truthful", "deceptive", "absent"]);

function finiteNumber(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

export function parseFrame(text: string): WireFrame | null {
  let data: unknown;
  try {
    data = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null || Array.isArray(data)) {
    return null;
  }
  const f = data as Record<string, unknown>;
  if (!Number.isInteger(f.t_ms) || (f.t_ms as number) < 0) {
    return null;
  }
  if (!finiteNumber(f.c) || f.c < 0 || f.c > 1) {
    return null;
  }
  if (typeof f.mode !== "string" || !MODES.has(f.mode)) {
    return null;
  }
  if (!finiteNumber(f.tempo) || f.tempo <= 0) {
    return null;
  }
  if (!finiteNumber(f.beat_phase) || f.beat_phase < 0 || f.beat_phase >= 1) {
    return null;
  }
  return {
    t_ms: f.t_ms as number,
    c: f.c,
    mode: f.mode as Mode,
    tempo: f.tempo,
    beat_phase: f.beat_phase,
  };
}
