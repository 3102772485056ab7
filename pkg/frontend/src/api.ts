import type {
  Analysis,
  AnalysisListPayload,
  ApiError,
  DiffPayload,
  LayoutPayload,
  MetricsPayload,
  ModelListPayload,
  ModelRecord,
  OptimizationSelection,
  OptionsPayload,
  SimulationPayload,
  SourcePayload,
  SummaryPayload,
  TaskCodePayload,
  TimelinePayload,
} from "./types.js";

export class RequestFailed extends Error {
  constructor(readonly error: ApiError) {
    super(`${error.code}: ${error.message}`);
  }
}

export interface ClientOptions {
  baseUrl?: string;
  user?: string | null;
  /** Share token appended as ?t= to every read. */
  token?: string | null;
  fetchFn?: typeof fetch;
}

/** Builds the query string; arrays repeat the key, null/undefined drop out. */
export function buildQuery(params: Record<string, unknown>): string {
  const q = new URLSearchParams();
  for (const [key, value] of Object.entries(params)) {
    if (value === null || value === undefined) continue;
    if (Array.isArray(value)) {
      for (const item of value) q.append(key, String(item));
    } else {
      q.append(key, String(value));
    }
  }
  const s = q.toString();
  return s ? `?${s}` : "";
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: typeof fetch;
  user: string | null;
  token: string | null;

  constructor(opts: ClientOptions = {}) {
    this.base = (opts.baseUrl ?? "").replace(/\/$/, "");
    this.user = opts.user ?? null;
    this.token = opts.token ?? null;
    this.fetchFn = opts.fetchFn ?? fetch.bind(globalThis);
  }

  private async request<T>(
    method: string,
    path: string,
    params: Record<string, unknown> = {},
    body?: unknown,
    signal?: AbortSignal,
  ): Promise<T> {
    if (this.token) params = { ...params, t: this.token };
    const headers: Record<string, string> = {};
    if (this.user) headers["X-User"] = this.user;
    const init: RequestInit = { method, headers, signal };
    if (body !== undefined) {
      if (body instanceof FormData) {
        init.body = body;
      } else {
        headers["Content-Type"] = "application/json";
        init.body = JSON.stringify(body);
      }
    }
    const resp = await this.fetchFn(this.base + path + buildQuery(params), init);
    const payload = await resp.json();
    if (!resp.ok) throw new RequestFailed(payload as ApiError);
    return payload as T;
  }

  uploadModel(file: Blob, name: string, signal?: AbortSignal): Promise<ModelRecord> {
    const form = new FormData();
    form.append("package", file, name);
    return this.request("POST", "/api/models", {}, form, signal);
  }

  listModels(signal?: AbortSignal): Promise<ModelListPayload> {
    return this.request("GET", "/api/models", {}, undefined, signal);
  }

  summary(modelId: string, signal?: AbortSignal): Promise<SummaryPayload> {
    return this.request("GET", `/api/models/${modelId}/summary`, {}, undefined, signal);
  }

  metrics(
    modelId: string,
    opts: {
      selection?: OptimizationSelection;
      analysis?: string;
      offset?: number;
      limit?: number;
    } = {},
    signal?: AbortSignal,
  ): Promise<MetricsPayload> {
    return this.request(
      "GET",
      `/api/models/${modelId}/metrics`,
      {
        selection: opts.selection ? JSON.stringify(opts.selection) : undefined,
        analysis: opts.analysis,
        offset: opts.offset,
        limit: opts.limit,
      },
      undefined,
      signal,
    );
  }

  layout(modelId: string, collapse: string[] = [], signal?: AbortSignal): Promise<LayoutPayload> {
    return this.request(
      "GET",
      `/api/models/${modelId}/layout`,
      collapse.length ? { collapse } : {},
      undefined,
      signal,
    );
  }

  timeline(modelId: string, signal?: AbortSignal): Promise<TimelinePayload> {
    return this.request("GET", `/api/models/${modelId}/timeline`, {}, undefined, signal);
  }

  options(modelId: string, taskId: number, signal?: AbortSignal): Promise<OptionsPayload> {
    return this.request(
      "GET",
      `/api/models/${modelId}/tasks/${taskId}/options`,
      {},
      undefined,
      signal,
    );
  }

  simulate(
    modelId: string,
    selection: OptimizationSelection,
    signal?: AbortSignal,
  ): Promise<SimulationPayload> {
    return this.request("POST", `/api/models/${modelId}/simulate`, {}, selection, signal);
  }

  saveAnalysis(
    modelId: string,
    name: string,
    selection: OptimizationSelection,
    signal?: AbortSignal,
  ): Promise<Analysis> {
    return this.request(
      "POST",
      `/api/models/${modelId}/analyses`,
      {},
      { name, selection },
      signal,
    );
  }

  listAnalyses(modelId: string, signal?: AbortSignal): Promise<AnalysisListPayload> {
    return this.request("GET", `/api/models/${modelId}/analyses`, {}, undefined, signal);
  }

  forkAnalysis(analysisId: string, name?: string, signal?: AbortSignal): Promise<Analysis> {
    return this.request(
      "POST",
      `/api/analyses/${analysisId}/fork`,
      {},
      name ? { name } : {},
      signal,
    );
  }

  share(
    modelId: string,
    opts: { users?: string[]; link_sharing?: boolean },
    signal?: AbortSignal,
  ): Promise<ModelRecord> {
    return this.request("POST", `/api/models/${modelId}/share`, {}, opts, signal);
  }

  diff(baseId: string, targetId: string, signal?: AbortSignal): Promise<DiffPayload> {
    return this.request(
      "GET",
      "/api/diff",
      { base: baseId, target: targetId },
      undefined,
      signal,
    );
  }

  taskCode(modelId: string, taskId: number, signal?: AbortSignal): Promise<TaskCodePayload> {
    return this.request(
      "GET",
      `/api/models/${modelId}/tasks/${taskId}/code`,
      {},
      undefined,
      signal,
    );
  }

  source(
    modelId: string,
    file: string,
    range?: { start: number; end: number },
    signal?: AbortSignal,
  ): Promise<SourcePayload> {
    return this.request(
      "GET",
      `/api/models/${modelId}/code`,
      { file, start: range?.start, end: range?.end },
      undefined,
      signal,
    );
  }
}

/** Serializes "latest call wins" request streams: starting a new call
 * aborts the one in flight, and stale resolutions are swallowed. */
export class LatestWins {
  private controller: AbortController | null = null;
  private seq = 0;

  async run<T>(fn: (signal: AbortSignal) => Promise<T>): Promise<T | undefined> {
    this.controller?.abort();
    const controller = new AbortController();
    this.controller = controller;
    const ticket = ++this.seq;
    try {
      const result = await fn(controller.signal);
      return ticket === this.seq ? result : undefined;
    } catch (err) {
      if (controller.signal.aborted) return undefined;
      throw err;
    }
  }
}
