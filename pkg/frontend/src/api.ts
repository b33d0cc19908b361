import type {
  ApiErrorBody,
  DatasetSummary,
  FrontierPoint,
  JobKind,
  JobRecord,
  MetricDescriptor,
  StakeholderPreset,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Server-reported error; `field` names the offending control when known. */
export class ApiRequestError extends Error {
  status: number;
  code: string;
  field: string | null;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.name = "ApiRequestError";
    this.status = status;
    this.code = body.code;
    this.field = body.field ?? null;
  }
}

export interface PollOptions {
  intervalMs?: number;
  maxIntervalMs?: number;
  /** consecutive network failures tolerated before giving up */
  maxRetries?: number;
  onProgress?: (record: JobRecord) => void;
  signal?: { cancelled: boolean };
  /** injectable for tests; defaults to real timers */
  sleep?: (ms: number) => Promise<void>;
}

const realSleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

/** JSON-stringify with sorted object keys, so equal payloads hash equally. */
export function stableStringify(value: unknown): string {
  if (value === null || typeof value !== "object") return JSON.stringify(value);
  if (Array.isArray(value)) {
    return "[" + value.map(stableStringify).join(",") + "]";
  }
  const entries = Object.entries(value as Record<string, unknown>)
    .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
    .map(([k, v]) => JSON.stringify(k) + ":" + stableStringify(v));
  return "{" + entries.join(",") + "}";
}

/** FNV-1a over the stable payload encoding; identical launches share a key,
 * which lets the server hand back the existing job instead of a duplicate. */
export function jobKey(kind: JobKind, payload: unknown): string {
  const text = kind + "\n" + stableStringify(payload);
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return "ui-" + hash.toString(16).padStart(8, "0");
}

export class ApiClient {
  baseUrl: string;
  /** set after any network failure; cleared by the next successful call */
  readOnly = false;
  cachedDescriptors: MetricDescriptor[] | null = null;

  private fetchImpl: FetchLike;

  constructor(baseUrl = "", fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, init);
    } catch (err) {
      this.readOnly = true;
      throw err;
    }
    this.readOnly = false;
    if (!response.ok) {
      let body: ApiErrorBody;
      try {
        body = (await response.json()) as ApiErrorBody;
      } catch {
        body = { code: "http_error", message: `HTTP ${response.status}` };
      }
      throw new ApiRequestError(response.status, body);
    }
    return (await response.json()) as T;
  }

  /** Descriptor fetch keeps the last good copy so the weight panels still
   * render (read-only) when the server is unreachable. */
  async getMetrics(): Promise<MetricDescriptor[]> {
    try {
      const out = await this.request<MetricDescriptor[]>("/v1/metrics");
      this.cachedDescriptors = out;
      return out;
    } catch (err) {
      if (err instanceof ApiRequestError) throw err;
      if (this.cachedDescriptors) return this.cachedDescriptors;
      throw err;
    }
  }

  getDatasets(): Promise<DatasetSummary[]> {
    return this.request("/v1/datasets");
  }

  getStakeholders(): Promise<StakeholderPreset[]> {
    return this.request("/v1/stakeholders");
  }

  submitJob(kind: JobKind, payload: unknown): Promise<JobRecord> {
    return this.request("/v1/jobs", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ kind, payload, idempotency_key: jobKey(kind, payload) }),
    });
  }

  getJob(id: string): Promise<JobRecord> {
    return this.request(`/v1/jobs/${id}`);
  }

  getFrontier(id: string): Promise<FrontierPoint[]> {
    return this.request(`/v1/jobs/${id}/frontier`);
  }

  /**
   * Poll a job to a terminal state. Network errors back off exponentially
   * (interval doubles up to maxIntervalMs) without losing the job id, so a
   * restarting server resumes the same poll. Resolves with the final record;
   * rejects once the job fails or retries are exhausted.
   */
  async pollJob(id: string, options: PollOptions = {}): Promise<JobRecord> {
    const base = options.intervalMs ?? 1000;
    const cap = options.maxIntervalMs ?? 15000;
    const maxRetries = options.maxRetries ?? 5;
    const sleep = options.sleep ?? realSleep;

    let interval = base;
    let failures = 0;
    while (true) {
      if (options.signal?.cancelled) throw new Error("poll cancelled");
      let record: JobRecord;
      try {
        record = await this.getJob(id);
      } catch (err) {
        if (err instanceof ApiRequestError) throw err;
        failures += 1;
        if (failures > maxRetries) throw err;
        await sleep(interval);
        interval = Math.min(interval * 2, cap);
        continue;
      }
      failures = 0;
      interval = base;
      options.onProgress?.(record);
      if (record.state === "done") return record;
      if (record.state === "failed") {
        throw new Error(record.error ?? "job failed");
      }
      await sleep(interval);
    }
  }
}
