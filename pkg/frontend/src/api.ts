/**
 * Typed client for the planning service.
 *
 * All numbers displayed anywhere in the UI originate from these responses;
 * the client never transforms values beyond JSON parsing.
 */

import type {
  EffectSizeResponse,
  PilotResponse,
  PowerResponse,
  PresetInfo,
  SampleSizeResponse,
  SimEvent,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = fetch,
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!resp.ok) {
      const detail = (await resp.json().catch(() => ({}))) as {
        code?: string;
        message?: string;
      };
      throw new ApiError(resp.status, detail.code ?? "error", detail.message ?? resp.statusText);
    }
    return (await resp.json()) as T;
  }

  async health(): Promise<boolean> {
    const resp = await this.fetchImpl(`${this.baseUrl}/health`);
    return resp.ok;
  }

  power(body: Record<string, unknown>): Promise<PowerResponse> {
    return this.post("/v1/power", body);
  }

  sampleSize(body: Record<string, unknown>): Promise<SampleSizeResponse> {
    return this.post("/v1/samplesize", body);
  }

  effectSize(body: Record<string, unknown>): Promise<EffectSizeResponse> {
    return this.post("/v1/effectsize", body);
  }

  pilot(body: Record<string, unknown>): Promise<PilotResponse> {
    return this.post("/v1/pilot", body);
  }

  async presets(): Promise<PresetInfo[]> {
    const resp = await this.fetchImpl(`${this.baseUrl}/v1/presets`);
    if (!resp.ok) throw new ApiError(resp.status, "error", resp.statusText);
    const doc = (await resp.json()) as { presets: PresetInfo[] };
    return doc.presets;
  }

  /**
   * Start a simulation and yield its newline-delimited JSON events.
   * Pass an AbortSignal to cancel mid-stream.
   */
  async *simulate(
    body: Record<string, unknown>,
    signal?: AbortSignal,
  ): AsyncGenerator<SimEvent> {
    const resp = await this.fetchImpl(`${this.baseUrl}/v1/simulate`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
      signal,
    });
    if (!resp.ok || resp.body === null) {
      const detail = (await resp.json().catch(() => ({}))) as {
        code?: string;
        message?: string;
      };
      throw new ApiError(resp.status, detail.code ?? "error", detail.message ?? resp.statusText);
    }
    yield* parseEventStream(resp.body, signal);
  }
}

/** Split a byte stream on newlines and parse each line as one event. */
export async function* parseEventStream(
  stream: ReadableStream<Uint8Array>,
  signal?: AbortSignal,
): AsyncGenerator<SimEvent> {
  const reader = stream.getReader();
  const decoder = new TextDecoder();
  let buffer = "";
  try {
    for (;;) {
      if (signal?.aborted) {
        await reader.cancel();
        return;
      }
      const { done, value } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      let idx: number;
      while ((idx = buffer.indexOf("\n")) >= 0) {
        const line = buffer.slice(0, idx).trim();
        buffer = buffer.slice(idx + 1);
        if (line) yield JSON.parse(line) as SimEvent;
      }
    }
    const tail = buffer.trim();
    if (tail) yield JSON.parse(tail) as SimEvent;
  } finally {
    reader.releaseLock();
  }
}
