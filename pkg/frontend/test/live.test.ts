/**
 * Live cross-stack checks against a running service.  Skipped unless
 * QLPOWER_API_URL is set (e.g. http://127.0.0.1:8707); start one with:
 *
 *     qlpower serve --port 8707
 */

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { renderSampleSize } from "../src/render.js";
import type { SimEvent, SimResult } from "../src/types.js";

const BASE = process.env.QLPOWER_API_URL;

describe.skipIf(!BASE)("live service parity", () => {
  const api = new ApiClient(BASE!);

  it("health probe answers ok", async () => {
    expect(await api.health()).toBe(true);
  });

  it("renders the sample-size anchor exactly as returned", async () => {
    const resp = await api.sampleSize({ f2: 0.022, df: 4, alpha: 0.05, power: 0.8 });
    const view = renderSampleSize(resp);
    expect(view.headline).toBe(String(resp.n));
    expect(resp.n).toBe(543);
  });

  it("consumes a full progress stream for a capped preset without divergence", async () => {
    const events: SimEvent[] = [];
    for await (const event of api.simulate({
      preset: "wald_count_log_var_prop_mean",
      replicates: 25,
      seed: 7,
    })) {
      events.push(event);
    }
    const result = events[events.length - 1] as SimResult;
    expect(result.type).toBe("result");
    const progress = events.slice(0, -1);
    expect(progress.every((e) => e.type === "progress")).toBe(true);
    // one progress event per grid point, and the final payload agrees
    expect(progress.length).toBe(result.points.length);
    expect(result.seed).toBe(7);
    for (const pt of result.points) {
      for (const cell of pt.cells) {
        expect(cell.replicates).toBe(25);
      }
    }
  }, 120_000);
});
