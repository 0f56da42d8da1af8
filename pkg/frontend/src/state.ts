/**
 * Planner session state and its URL-fragment serialization, so a what-if
 * configuration can be shared as a link.  Client-side validation mirrors the
 * bounds the service enforces; it never computes statistics.
 */

import type { EffectMode } from "./types.js";

export interface PinnedComparison {
  label: string;
  n: number;
  delta: number;
}

export interface PlannerSession {
  mode: EffectMode;
  f2: number;
  phi: number;
  wOne: number;
  r2: number;
  df: number;
  alpha: number;
  targetPower: number;
  solveFor: "n" | "power";
  n: number;
  rho: number;
  pins: PinnedComparison[];
}

export const DEFAULT_SESSION: PlannerSession = {
  mode: "f2",
  f2: 0.022,
  phi: 0.096,
  wOne: 8.68,
  r2: 0.02,
  df: 4,
  alpha: 0.05,
  targetPower: 0.8,
  solveFor: "n",
  n: 400,
  rho: 0.0,
  pins: [],
};

export interface FieldError {
  field: string;
  message: string;
}

/** Same bounds the service's request validation applies. */
export function validateSession(s: PlannerSession): FieldError[] {
  const errors: FieldError[] = [];
  if (!(s.alpha > 0 && s.alpha < 1)) errors.push({ field: "alpha", message: "alpha must lie in (0, 1)" });
  if (!(Number.isInteger(s.df) && s.df >= 1)) errors.push({ field: "df", message: "df must be a positive integer" });
  if (s.mode === "f2" && s.f2 < 0) errors.push({ field: "f2", message: "f2 must be non-negative" });
  if (s.mode === "phi" && s.phi < 0) errors.push({ field: "phi", message: "phi must be non-negative" });
  if (s.mode === "phi" && s.wOne <= 0) errors.push({ field: "wOne", message: "w1 must be positive" });
  if (s.mode === "r2" && !(s.r2 >= 0 && s.r2 < 1)) errors.push({ field: "r2", message: "R2 must lie in [0, 1)" });
  if (s.solveFor === "n" && !(s.targetPower > s.alpha && s.targetPower < 1))
    errors.push({ field: "targetPower", message: "power must lie in (alpha, 1)" });
  if (s.solveFor === "power" && !(Number.isInteger(s.n) && s.n >= 1))
    errors.push({ field: "n", message: "n must be a positive integer" });
  if (!(s.rho >= -1 && s.rho <= 1)) errors.push({ field: "rho", message: "rho must lie in [-1, 1]" });
  return errors;
}

/** Request body for the endpoint the session currently needs. */
export function sessionRequest(s: PlannerSession): {
  endpoint: "/v1/power" | "/v1/samplesize";
  body: Record<string, unknown>;
} {
  const effect: Record<string, unknown> =
    s.mode === "f2" ? { f2: s.f2 } : s.mode === "phi" ? { phi: s.phi, w_one: s.wOne } : { r2: s.r2 };
  if (s.solveFor === "n") {
    return {
      endpoint: "/v1/samplesize",
      body: { ...effect, df: s.df, alpha: s.alpha, power: s.targetPower },
    };
  }
  return { endpoint: "/v1/power", body: { ...effect, df: s.df, alpha: s.alpha, n: s.n } };
}

const NUMERIC_FIELDS = ["f2", "phi", "wOne", "r2", "df", "alpha", "targetPower", "n", "rho"] as const;

export function encodeSession(s: PlannerSession): string {
  const params = new URLSearchParams();
  params.set("mode", s.mode);
  params.set("solveFor", s.solveFor);
  for (const field of NUMERIC_FIELDS) {
    params.set(field, String(s[field]));
  }
  if (s.pins.length > 0) params.set("pins", JSON.stringify(s.pins));
  return params.toString();
}

export function decodeSession(fragment: string): PlannerSession {
  const params = new URLSearchParams(fragment.replace(/^#/, ""));
  const session: PlannerSession = { ...DEFAULT_SESSION, pins: [] };
  const mode = params.get("mode");
  if (mode === "f2" || mode === "phi" || mode === "r2") session.mode = mode;
  const solveFor = params.get("solveFor");
  if (solveFor === "n" || solveFor === "power") session.solveFor = solveFor;
  for (const field of NUMERIC_FIELDS) {
    const raw = params.get(field);
    if (raw !== null && raw !== "" && Number.isFinite(Number(raw))) {
      (session as unknown as Record<string, number>)[field] = Number(raw);
    }
  }
  const pins = params.get("pins");
  if (pins) {
    try {
      const parsed = JSON.parse(pins) as PinnedComparison[];
      if (Array.isArray(parsed)) session.pins = parsed;
    } catch {
      // malformed pins are dropped rather than breaking the session
    }
  }
  return session;
}
