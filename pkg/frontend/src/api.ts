/**
 * Typed client for the query-service HTTP API, plus the per-panel
 * fetch sequencer: a newer request for a panel supersedes the older
 * one (abort) and any response that is not the latest is discarded by
 * sequence number, so stale data can never overwrite fresh data.
 */

export interface Bucket {
  start: string;
  count: number;
}

export interface TimelinePayload {
  q: string;
  field: string;
  match: string;
  weighted: boolean;
  granularity: string;
  range: { from: string; to: string };
  buckets: Bucket[];
}

export interface TermEntry {
  term: string;
  score: number;
}

export interface TopTermsPayload {
  q: string;
  field: string;
  match: string;
  range: { from: string; to: string };
  k: number;
  entries: TermEntry[];
}

export interface CooccurSeries {
  key: string;
  granularity: string;
  range: { from: string; to: string };
  buckets: Bucket[];
}

export interface CooccurPayload {
  field: string;
  a: CooccurSeries;
  b: CooccurSeries;
  overlap: Bucket[];
}

export interface EntitySearchPayload {
  prefix: string;
  entities: { key: string; postings: number }[];
}

export interface HealthPayload {
  status: string;
  segments: number;
  doc_count: number;
  posting_count: number;
  time_span: { min: string; max: string } | null;
  fields: string[];
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private base: string = "",
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async get<T>(
    path: string,
    params: Record<string, string>,
    signal?: AbortSignal,
  ): Promise<T> {
    const search = new URLSearchParams(params).toString();
    const response = await this.fetchFn(`${this.base}${path}?${search}`, { signal });
    const body = await response.json();
    if (!response.ok) {
      const err = (body as { error?: { code?: string; message?: string } }).error;
      throw new ApiError(
        response.status,
        err?.code ?? "error",
        err?.message ?? `request failed with ${response.status}`,
      );
    }
    return body as T;
  }

  health(signal?: AbortSignal): Promise<HealthPayload> {
    return this.get("/health", {}, signal);
  }

  timeline(
    params: {
      q: string;
      field: string;
      match: string;
      granularity: string;
      from: string;
      to: string;
    },
    signal?: AbortSignal,
  ): Promise<TimelinePayload> {
    return this.get("/timeline", params, signal);
  }

  topTerms(
    params: {
      q: string;
      field: string;
      match: string;
      k: string;
      from: string;
      to: string;
    },
    signal?: AbortSignal,
  ): Promise<TopTermsPayload> {
    return this.get("/top-terms", params, signal);
  }

  cooccur(
    params: {
      a: string;
      b: string;
      field: string;
      granularity: string;
      from: string;
      to: string;
      strict?: string;
    },
    signal?: AbortSignal,
  ): Promise<CooccurPayload> {
    return this.get("/cooccur", params, signal);
  }

  entitySearch(prefix: string, signal?: AbortSignal): Promise<EntitySearchPayload> {
    return this.get("/entity-search", { prefix }, signal);
  }
}

/** Per-panel in-flight bookkeeping: latest request wins, stale ones
 * are aborted and their results dropped. */
export class PanelFetcher {
  private seq = 0;
  private controller: AbortController | null = null;

  /** Runs the request; resolves null when a newer request superseded it. */
  async issue<T>(run: (signal: AbortSignal) => Promise<T>): Promise<T | null> {
    this.controller?.abort();
    const controller = new AbortController();
    this.controller = controller;
    const mySeq = ++this.seq;
    try {
      const result = await run(controller.signal);
      return mySeq === this.seq ? result : null;
    } catch (err) {
      if (mySeq !== this.seq || controller.signal.aborted) return null;
      throw err;
    }
  }

  get current(): number {
    return this.seq;
  }
}
