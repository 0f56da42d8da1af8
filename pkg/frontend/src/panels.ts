/**
 * Panel controllers: wire session state and API responses into the DOM.
 *
 * Each controller owns one container element.  Power/effect requests follow
 * cancel-and-replace (at most one in flight); the simulate panel holds at
 * most one open stream.
 */

import { ApiClient, ApiError } from "./api.js";
import {
  CalibrationRow,
  linePath,
  renderCalibrationRows,
  renderDeltaCurveTable,
  renderPilotSummary,
  renderPower,
  renderSampleSize,
  resultSummary,
  show,
} from "./render.js";
import { PlannerSession, sessionRequest, validateSession } from "./state.js";
import type { PilotResponse, PresetInfo, SimResult } from "./types.js";

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderTable(header: string[], rows: string[][], rowClass?: (i: number) => string): HTMLElement {
  const table = el("table", "data");
  const thead = el("thead");
  const headRow = el("tr");
  for (const h of header) headRow.appendChild(el("th", undefined, h));
  thead.appendChild(headRow);
  table.appendChild(thead);
  const tbody = el("tbody");
  rows.forEach((cells, i) => {
    const tr = el("tr", rowClass ? rowClass(i) : undefined);
    for (const c of cells) tr.appendChild(el("td", undefined, c));
    tbody.appendChild(tr);
  });
  table.appendChild(tbody);
  return table;
}

export class PowerPanel {
  private inflight: AbortController | null = null;

  constructor(
    private api: ApiClient,
    private container: HTMLElement,
  ) {}

  async update(session: PlannerSession): Promise<void> {
    const errors = validateSession(session);
    if (errors.length > 0) {
      this.renderErrors(errors.map((e) => `${e.field}: ${e.message}`));
      return;
    }
    this.inflight?.abort();
    this.inflight = new AbortController();
    const { endpoint, body } = sessionRequest(session);
    try {
      const view =
        endpoint === "/v1/samplesize"
          ? renderSampleSize(await this.api.sampleSize(body))
          : renderPower(await this.api.power(body), session.alpha);
      this.container.replaceChildren();
      this.container.appendChild(el("div", "headline", view.headline));
      for (const line of view.lines) this.container.appendChild(el("div", "line", line));
      if (view.hint) this.container.appendChild(el("div", "hint", view.hint));
      if (session.pins.length > 0) {
        const rows = session.pins.map((p) => [p.label, show(p.n), show(p.delta)]);
        this.container.appendChild(renderTable(["pinned", "n", "delta"], rows));
      }
    } catch (err) {
      this.renderErrors([err instanceof ApiError ? `${err.code}: ${err.message}` : String(err)]);
    }
  }

  private renderErrors(messages: string[]): void {
    this.container.replaceChildren();
    for (const m of messages) this.container.appendChild(el("div", "error", m));
  }
}

export class DeltaCurvePanel {
  constructor(
    private api: ApiClient,
    private container: HTMLElement,
  ) {}

  async update(csvText: string, mapping: Record<string, unknown>, alpha: number, power: number): Promise<void> {
    this.container.replaceChildren();
    this.container.appendChild(el("div", "line", "analyzing pilot..."));
    let resp: PilotResponse;
    try {
      resp = await this.api.pilot({ csv: csvText, mapping, alpha, power });
    } catch (err) {
      this.container.replaceChildren();
      this.container.appendChild(
        el("div", "error", err instanceof ApiError ? `${err.code}: ${err.message}` : String(err)),
      );
      return;
    }
    this.container.replaceChildren();
    for (const line of renderPilotSummary(resp)) this.container.appendChild(el("div", "line", line));
    const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
    svg.setAttribute("viewBox", "0 0 480 240");
    svg.setAttribute("class", "chart");
    const deltas = resp.delta_curve.map((p) => p.delta);
    const series: Array<[string, number[]]> = [
      ["n", resp.delta_curve.map((p) => p.n)],
      ["n_phi", resp.delta_curve.map((p) => p.n_phi)],
      ["n_r", resp.delta_curve.map((p) => p.n_r)],
    ];
    for (const [name, ys] of series) {
      const path = document.createElementNS("http://www.w3.org/2000/svg", "path");
      path.setAttribute("d", linePath(deltas, ys, 480, 240));
      path.setAttribute("class", `series-${name}`);
      path.setAttribute("fill", "none");
      svg.appendChild(path);
    }
    this.container.appendChild(svg);
    const table = renderDeltaCurveTable(resp.delta_curve);
    this.container.appendChild(renderTable(table.header, table.rows));
    const download = el("a", "download", "download curve CSV") as HTMLAnchorElement;
    download.href = URL.createObjectURL(new Blob([deltaCurveCsv(resp)], { type: "text/csv" }));
    download.download = "delta_curve.csv";
    this.container.appendChild(download);
  }
}

/** CSV identical to the planner's own export: raw response values, comma-joined. */
export function deltaCurveCsv(resp: PilotResponse): string {
  const header = "delta,f2,f2_phi,f2_r,phi,r2,n,n_phi,n_r,ratio_phi,ratio_r";
  const rows = resp.delta_curve.map((p) =>
    [p.delta, p.f2, p.f2_phi, p.f2_r, p.phi, p.r2, p.n, p.n_phi, p.n_r, p.ratio_phi, p.ratio_r]
      .map(show)
      .join(","),
  );
  return [header, ...rows].join("\n") + "\n";
}

export class SimulatePanel {
  private stream: AbortController | null = null;

  constructor(
    private api: ApiClient,
    private container: HTMLElement,
  ) {}

  populatePresets(presets: PresetInfo[], select: HTMLSelectElement): void {
    select.replaceChildren();
    if (presets.length === 0) {
      const option = document.createElement("option");
      option.textContent = "(no presets available)";
      option.disabled = true;
      select.appendChild(option);
      return;
    }
    for (const p of presets) {
      const option = document.createElement("option");
      option.value = p.name;
      option.textContent = p.label;
      select.appendChild(option);
    }
  }

  cancel(): void {
    this.stream?.abort();
    this.stream = null;
    this.container.replaceChildren();
    this.container.appendChild(el("div", "line", "cancelled"));
  }

  async run(preset: string, replicates: number, seed: number, alpha: number, power: number): Promise<SimResult | null> {
    this.stream?.abort();
    this.stream = new AbortController();
    const signal = this.stream.signal;
    this.container.replaceChildren();
    const bar = el("progress") as HTMLProgressElement;
    bar.max = 1;
    bar.value = 0;
    const status = el("div", "line", "starting...");
    this.container.append(bar, status);
    let result: SimResult | null = null;
    try {
      for await (const event of this.api.simulate({ preset, replicates, seed }, signal)) {
        if (event.type === "progress") {
          bar.max = event.total;
          bar.value = event.done;
          status.textContent = `grid point ${show(event.done)} of ${show(event.total)}`;
        } else if (event.type === "result") {
          result = event;
        } else {
          status.textContent = `error: ${event.message}`;
          return null;
        }
      }
    } catch (err) {
      if (!signal.aborted) {
        status.textContent = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
      }
      return null;
    } finally {
      this.stream = null;
    }
    if (result) this.renderResult(result, alpha, power);
    return result;
  }

  private renderResult(result: SimResult, alpha: number, power: number): void {
    this.container.replaceChildren();
    for (const line of resultSummary(result)) this.container.appendChild(el("div", "line", line));
    const rows = renderCalibrationRows(result.points, alpha, power);
    this.container.appendChild(
      renderTable(
        ["grid", "variant", "hypothesis", "n", "rate", "95% CI", "nonconverged"],
        rows.map((r) => r.cells),
        (i) => {
          const row = rows[i] as CalibrationRow;
          return row.inBand ? "in-band" : "out-of-band";
        },
      ),
    );
  }
}
