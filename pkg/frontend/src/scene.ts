// Scene builder: turns one display-state snapshot into a flat list of
// tagged primitives.  Keeping this a pure function lets the tests count
// exactly what each condition draws; the canvas interpreter lives in
// draw.ts and stays trivial.

import { faceGeometry, nodOffset, pulse01 } from "./geometry";
import { beatPhaseAt, renderedC, type DisplayState } from "./state";

export type Feature = "outline" | "eye" | "mouth" | "glow" | "badge";

/** Primitives that express confidence through the face itself. */
export const FACIAL_FEATURES: ReadonlySet<Feature> = new Set(["eye", "mouth"]);

export const CONNECTING_TEXT = "connecting…";
export const LOST_TEXT = "signal lost";

const FACE_FILL = "#f2c94c";
const FACE_EDGE = "#76601e";
const INK = "#23262d";
const GLOW_COLOR = "#ffd166";
const BADGE_COLOR = "#9aa0a6";

export interface DiscPrim {
  kind: "disc";
  feature: Feature;
  x: number;
  y: number;
  r: number;
  fill: string;
}

export interface RingPrim {
  kind: "ring";
  feature: Feature;
  x: number;
  y: number;
  r: number;
  width: number;
  stroke: string;
  alpha: number;
}

export interface EllipsePrim {
  kind: "ellipse";
  feature: Feature;
  x: number;
  y: number;
  rx: number;
  ry: number;
  fill: string;
}

export interface CurvePrim {
  kind: "curve";
  feature: Feature;
  x1: number;
  y1: number;
  cx: number;
  cy: number;
  x2: number;
  y2: number;
  width: number;
  stroke: string;
}

export interface LabelPrim {
  kind: "label";
  feature: Feature;
  x: number;
  y: number;
  sizePx: number;
  text: string;
  fill: string;
}

export type Primitive = DiscPrim | RingPrim | EllipsePrim | CurvePrim | LabelPrim;

export function buildScene(
  state: DisplayState,
  nowMs: number,
  width: number,
  height: number,
): Primitive[] {
  const radius = 0.36 * Math.min(width, height);
  const phase = beatPhaseAt(state, nowMs);
  const centerX = width / 2;
  const centerY = height / 2 + nodOffset(phase) * radius;
  const face = faceGeometry(renderedC(state, nowMs));
  const prims: Primitive[] = [];

  const hideFace = state.mode === "absent";
  if (!hideFace && state.glowActive) {
    prims.push({
      kind: "ring",
      feature: "glow",
      x: centerX,
      y: centerY,
      r: radius * 1.14,
      width: radius * 0.12,
      stroke: GLOW_COLOR,
      alpha: 0.25 + 0.5 * pulse01(phase),
    });
  }

  prims.push({
    kind: "disc",
    feature: "outline",
    x: centerX,
    y: centerY,
    r: radius,
    fill: FACE_FILL,
  });
  prims.push({
    kind: "ring",
    feature: "outline",
    x: centerX,
    y: centerY,
    r: radius,
    width: radius * 0.035,
    stroke: FACE_EDGE,
    alpha: 1,
  });

  // The absent condition strips every confidence cue (eyes, mouth, glow)
  // but the blank face keeps nodding with the beat.
  if (!hideFace) {
    const eyeY = centerY - 0.18 * radius;
    const eyeSpread = 0.38 * radius;
    const eyeRx = face.eyeWidth * radius;
    const gazeShift = face.gazeDivergence * 0.5 * radius;
    prims.push({
      kind: "ellipse",
      feature: "eye",
      x: centerX - eyeSpread - gazeShift,
      y: eyeY,
      rx: eyeRx,
      ry: eyeRx * 1.15,
      fill: INK,
    });
    prims.push({
      kind: "ellipse",
      feature: "eye",
      x: centerX + eyeSpread + gazeShift,
      y: eyeY,
      rx: eyeRx,
      ry: eyeRx * 1.15,
      fill: INK,
    });

    const mouthY = centerY + 0.32 * radius;
    prims.push({
      kind: "curve",
      feature: "mouth",
      x1: centerX - 0.42 * radius,
      y1: mouthY,
      cx: centerX,
      cy: mouthY + face.mouthCurve * 0.35 * radius,
      x2: centerX + 0.42 * radius,
      y2: mouthY,
      width: radius * 0.07,
      stroke: INK,
    });
  }

  if (state.connection !== "live") {
    const sizePx = Math.max(14, 0.05 * Math.min(width, height));
    prims.push({
      kind: "label",
      feature: "badge",
      x: width / 2,
      y: height - sizePx * 1.2,
      sizePx,
      text: state.connection === "connecting" ? CONNECTING_TEXT : LOST_TEXT,
      fill: BADGE_COLOR,
    });
  }

  return prims;
}
