// Typed client for the resequencing service. Every number the UI shows
// comes through here; nothing is computed client-side.

import type {
  EvalReport,
  FrameListing,
  GraphSummary,
  NeighborReport,
  RunRequest,
  RunResponse,
  SequenceRecord,
} from './types.js';

export interface ResponseLike {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<ResponseLike>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export class ApiClient {
  private base: string;

  constructor(
    base: string,
    private fetchFn: FetchLike,
  ) {
    this.base = base.replace(/\/+$/, '');
  }

  private async request<T>(path: string, init?: Parameters<FetchLike>[1]): Promise<T> {
    const res = await this.fetchFn(this.base + path, init);
    if (!res.ok) {
      let detail = 'request failed';
      try {
        const body = (await res.json()) as { detail?: unknown };
        if (body && body.detail !== undefined) detail = String(body.detail);
      } catch {
        // non-JSON error body; keep the generic detail
      }
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  frames(): Promise<FrameListing> {
    return this.request<FrameListing>('/api/frames');
  }

  graphSummary(): Promise<GraphSummary> {
    return this.request<GraphSummary>('/api/graph');
  }

  neighbors(index: number): Promise<NeighborReport> {
    return this.request<NeighborReport>(`/api/graph?neighbors_of=${index}`);
  }

  resequence(req: RunRequest): Promise<RunResponse> {
    return this.request<RunResponse>('/api/resequence', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(req),
    });
  }

  sequence(id: string): Promise<SequenceRecord> {
    return this.request<SequenceRecord>(`/api/sequence/${id}`);
  }

  evaluate(id: string, strategy: 'runs' | 'lcs' = 'runs'): Promise<EvalReport> {
    return this.request<EvalReport>(`/api/evaluate/${id}?strategy=${strategy}`);
  }

  thumbUrl(index: number): string {
    return `${this.base}/thumb/${index}`;
  }
}
