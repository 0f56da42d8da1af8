/**
 * Pure rendering helpers: API responses in, display strings / row models /
 * SVG paths out.  Values pass through String() untouched so what the user
 * reads is exactly what the service returned; the only local arithmetic is
 * chart geometry (pixel coordinates), never statistics.
 */

import type {
  DeltaPoint,
  PilotResponse,
  PowerResponse,
  SampleSizeResponse,
  SimPoint,
  SimResult,
} from "./types.js";

export function show(value: number | null | undefined): string {
  if (value === null || value === undefined) return "-";
  return String(value);
}

export interface PowerPanelView {
  headline: string;
  lines: string[];
  hint: string | null;
}

export function renderSampleSize(resp: SampleSizeResponse): PowerPanelView {
  return {
    headline: show(resp.n),
    lines: [`required n = ${show(resp.n)}`, `non-centrality = ${show(resp.delta)}`],
    hint: null,
  };
}

export function renderPower(resp: PowerResponse, alpha: number): PowerPanelView {
  const atNull = resp.delta === 0;
  return {
    headline: show(resp.power),
    lines: [`power = ${show(resp.power)}`, `non-centrality = ${show(resp.delta)}`],
    hint: atNull ? `zero effect: power is pinned at alpha = ${show(alpha)}` : null,
  };
}

export interface TableView {
  header: string[];
  rows: string[][];
}

export function renderDeltaCurveTable(points: DeltaPoint[]): TableView {
  return {
    header: ["delta", "f2", "n", "n_phi", "n_r", "n_phi/n", "n_r/n"],
    rows: points.map((p) => [
      show(p.delta),
      show(p.f2),
      show(p.n),
      show(p.n_phi),
      show(p.n_r),
      show(p.ratio_phi),
      show(p.ratio_r),
    ]),
  };
}

export function renderPilotSummary(resp: PilotResponse): string[] {
  return [
    `rows used = ${show(resp.ingest.n_rows)} (dropped ${show(resp.ingest.n_dropped)})`,
    `converged = ${resp.fit.converged}`,
    `sigma2 = ${show(resp.fit.sigma2_hat)}`,
    `phi = ${show(resp.effects.phi)}`,
    `R2 = ${show(resp.effects.r2)}`,
    `f2 = ${show(resp.effects.f2)}`,
    `non-centrality = ${show(resp.ncp)}`,
  ];
}

export interface CalibrationRow {
  cells: string[];
  /** whether the empirical rate's CI covers the target band */
  inBand: boolean;
  hypothesis: "null" | "alt";
}

export function renderCalibrationRows(
  points: SimPoint[],
  alpha: number,
  targetPower: number,
): CalibrationRow[] {
  const rows: CalibrationRow[] = [];
  for (const pt of points) {
    for (const cell of pt.cells) {
      const target = cell.hypothesis === "null" ? alpha : targetPower;
      rows.push({
        cells: [
          show(pt.grid_value),
          cell.variant,
          cell.hypothesis,
          show(cell.n),
          show(cell.rate),
          `[${show(cell.ci_lo)}, ${show(cell.ci_hi)}]`,
          show(cell.nonconverged),
        ],
        inBand: cell.ci_lo <= target && target <= cell.ci_hi,
        hypothesis: cell.hypothesis,
      });
    }
  }
  return rows;
}

export function resultSummary(result: SimResult): string[] {
  return [
    `grid points = ${show(result.points.length)}`,
    `seed = ${show(result.seed)}`,
  ];
}

/** Polyline path for an SVG chart; geometry only, data untouched. */
export function linePath(
  xs: number[],
  ys: number[],
  width: number,
  height: number,
  pad = 24,
): string {
  if (xs.length === 0 || xs.length !== ys.length) return "";
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMin = Math.min(...ys);
  const yMax = Math.max(...ys);
  const xSpan = xMax - xMin || 1;
  const ySpan = yMax - yMin || 1;
  const px = (x: number) => pad + ((x - xMin) / xSpan) * (width - 2 * pad);
  const py = (y: number) => height - pad - ((y - yMin) / ySpan) * (height - 2 * pad);
  return xs
    .map((x, i) => `${i === 0 ? "M" : "L"}${px(x).toFixed(1)},${py(ys[i]!).toFixed(1)}`)
    .join(" ");
}
