/** Wire types mirroring the HTTP API's JSON bodies. */

export type EffectMode = "f2" | "phi" | "r2";

export interface PowerResponse {
  power: number;
  delta: number;
  echo: Record<string, number>;
}

export interface SampleSizeResponse {
  n: number;
  delta: number;
  echo: Record<string, number>;
}

export interface EffectSizeReport {
  f2: number;
  phi: number;
  r2: number;
  f2_phi: number;
  f2_r: number;
  f2_s: number | null;
  w_one: number;
  mc_size: number;
  mc_se_f2: number;
}

export interface EffectSizeResponse {
  report: EffectSizeReport;
  echo: { seed: number; mc_size: number; rho: number; include_score: boolean };
}

export interface DeltaPoint {
  delta: number;
  f2: number;
  f2_phi: number;
  f2_r: number;
  phi: number;
  r2: number;
  n: number;
  n_phi: number;
  n_r: number;
  ratio_phi: number;
  ratio_r: number;
}

export interface PilotResponse {
  fit: {
    lambda_hat: number[];
    beta_hat: number[];
    sigma2_hat: number;
    converged: boolean;
    iterations: number;
    n_obs: number;
  };
  effects: EffectSizeReport;
  alpha: number;
  target_power: number;
  ncp: number;
  delta_curve: DeltaPoint[];
  ingest: {
    n_rows: number;
    n_dropped: number;
    adjustor_names: string[];
    predictor_names: string[];
    outcome_kind: string;
  };
}

export interface PresetInfo {
  name: string;
  label: string;
  family: string;
  scenario: Record<string, unknown>;
}

export interface SimCell {
  variant: string;
  hypothesis: "null" | "alt";
  n: number;
  rejections: number;
  replicates: number;
  rate: number;
  ci_lo: number;
  ci_hi: number;
  nonconverged: number;
  failed: number;
}

export interface SimPoint {
  grid_value: number;
  f2: number;
  phi: number;
  r2: number;
  f2_phi: number;
  f2_r: number;
  f2_s: number | null;
  sizes: Record<string, number>;
  cells: SimCell[];
}

export interface SimResult {
  type: "result";
  scenario: Record<string, unknown>;
  max_score_residual_per_n: number;
  points: SimPoint[];
  seed: number;
}

export type SimEvent =
  | { type: "progress"; done: number; total: number }
  | SimResult
  | { type: "error"; message: string };
