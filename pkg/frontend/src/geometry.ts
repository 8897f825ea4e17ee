// Pure confidence-to-expression mapping, kept apart from canvas code so
// the monotonicity contract can be tested headless.
//
// The display pins its expressive extremes at c = 0.1 and c = 0.9: values
// outside that band clamp, so the face is already at full frown / full
// smile at the published endpoints.  Every field below is monotone in c.

export const C_MIN_EXPRESSION = 0.1;
export const C_MAX_EXPRESSION = 0.9;

// All lengths are fractions of the face radius.
export const NOD_AMPLITUDE = 0.05;

export interface FaceGeometry {
  /** -1 full frown .. +1 full smile. */
  mouthCurve: number;
  /** Eye half-width; widens with confidence. */
  eyeWidth: number;
  /** Horizontal pupil drift away from center; 0 = eye contact. */
  gazeDivergence: number;
}

/** Normalized expression level: 0 at/below c=0.1, 1 at/above c=0.9. */
export function expressionLevel(c: number): number {
  const t = (c - C_MIN_EXPRESSION) / (C_MAX_EXPRESSION - C_MIN_EXPRESSION);
  return Math.min(1, Math.max(0, t));
}

export function faceGeometry(c: number): FaceGeometry {
  const t = expressionLevel(c);
  return {
    mouthCurve: 2 * t - 1,
    eyeWidth: 0.07 + 0.07 * t,
    gazeDivergence: 0.3 * (1 - t),
  };
}

/** Vertical bounce, one cycle per beat; same amplitude in every mode. */
export function nodOffset(beatPhase: number): number {
  return NOD_AMPLITUDE * Math.cos(2 * Math.PI * beatPhase);
}

/** Smooth 0..1 pulse locked to the beat, 1 on the beat itself. */
export function pulse01(beatPhase: number): number {
  return 0.5 + 0.5 * Math.cos(2 * Math.PI * beatPhase);
}
