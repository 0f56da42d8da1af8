/**
 * Application bootstrap: binds controls to the session, keeps the URL
 * fragment in sync, and debounces continuous inputs (250 ms) so dragging a
 * slider issues one request, not dozens.
 */

import { ApiClient } from "./api.js";
import { DeltaCurvePanel, PowerPanel, SimulatePanel } from "./panels.js";
import {
  DEFAULT_SESSION,
  PlannerSession,
  decodeSession,
  encodeSession,
} from "./state.js";

const DEBOUNCE_MS = 250;

export function debounce<A extends unknown[]>(fn: (...args: A) => void, ms: number): (...args: A) => void {
  let handle: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    if (handle !== undefined) clearTimeout(handle);
    handle = setTimeout(() => fn(...args), ms);
  };
}

function bindNumber(id: string, get: () => number, set: (v: number) => void, onChange: () => void): void {
  const input = document.getElementById(id) as HTMLInputElement | null;
  if (!input) return;
  input.value = String(get());
  input.addEventListener("input", () => {
    const v = Number(input.value);
    if (Number.isFinite(v)) {
      set(v);
      onChange();
    }
  });
}

export function start(): void {
  const api = new ApiClient("");
  let session: PlannerSession = location.hash.length > 1 ? decodeSession(location.hash) : { ...DEFAULT_SESSION };

  const powerPanel = new PowerPanel(api, document.getElementById("power-output")!);
  const deltaPanel = new DeltaCurvePanel(api, document.getElementById("delta-output")!);
  const simulatePanel = new SimulatePanel(api, document.getElementById("simulate-output")!);

  const syncUrl = () => {
    history.replaceState(null, "", `#${encodeSession(session)}`);
  };
  const refresh = debounce(() => {
    syncUrl();
    void powerPanel.update(session);
  }, DEBOUNCE_MS);

  for (const [id, field] of [
    ["f2", "f2"],
    ["phi", "phi"],
    ["w-one", "wOne"],
    ["r2", "r2"],
    ["df", "df"],
    ["alpha", "alpha"],
    ["target-power", "targetPower"],
    ["n", "n"],
  ] as const) {
    bindNumber(
      id,
      () => session[field] as number,
      (v) => {
        (session as unknown as Record<string, number>)[field] = v;
      },
      refresh,
    );
  }

  const modeSelect = document.getElementById("mode") as HTMLSelectElement | null;
  if (modeSelect) {
    modeSelect.value = session.mode;
    modeSelect.addEventListener("change", () => {
      session.mode = modeSelect.value as PlannerSession["mode"];
      refresh();
    });
  }
  const solveSelect = document.getElementById("solve-for") as HTMLSelectElement | null;
  if (solveSelect) {
    solveSelect.value = session.solveFor;
    solveSelect.addEventListener("change", () => {
      session.solveFor = solveSelect.value as PlannerSession["solveFor"];
      refresh();
    });
  }

  document.getElementById("pin")?.addEventListener("click", () => {
    const headline = document.querySelector("#power-output .headline")?.textContent;
    if (headline && session.solveFor === "n") {
      session.pins.push({ label: `df=${session.df}, power=${session.targetPower}`, n: Number(headline), delta: NaN });
      syncUrl();
      void powerPanel.update(session);
    }
  });

  const pilotFile = document.getElementById("pilot-file") as HTMLInputElement | null;
  const mappingText = document.getElementById("pilot-mapping") as HTMLTextAreaElement | null;
  document.getElementById("pilot-run")?.addEventListener("click", () => {
    const file = pilotFile?.files?.[0];
    if (!file || !mappingText) return;
    void file.text().then((csv) => {
      const mapping = JSON.parse(mappingText.value) as Record<string, unknown>;
      void deltaPanel.update(csv, mapping, session.alpha, session.targetPower);
    });
  });

  const presetSelect = document.getElementById("preset") as HTMLSelectElement | null;
  if (presetSelect) {
    void api.presets().then((presets) => simulatePanel.populatePresets(presets, presetSelect));
  }
  document.getElementById("simulate-run")?.addEventListener("click", () => {
    const replicates = Number((document.getElementById("replicates") as HTMLInputElement).value);
    const seed = Number((document.getElementById("seed") as HTMLInputElement).value);
    if (presetSelect?.value) {
      void simulatePanel.run(presetSelect.value, replicates, seed, session.alpha, session.targetPower);
    }
  });
  document.getElementById("simulate-cancel")?.addEventListener("click", () => simulatePanel.cancel());

  window.addEventListener("hashchange", () => {
    session = decodeSession(location.hash);
    void powerPanel.update(session);
  });

  void powerPanel.update(session);
}

if (typeof document !== "undefined" && document.getElementById("power-output")) {
  start();
}
