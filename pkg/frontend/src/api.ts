// Thin typed client over the backend's JSON endpoints.

import {
  ClassifyResponse,
  FeedbackResponse,
  SearchResponse,
  StatsResponse,
  Verdict,
} from './types.js';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: unknown,
  ) {
    super(`request failed with status ${status}`);
  }
}

async function parseOrThrow<T>(response: Response): Promise<T> {
  let body: unknown = null;
  try {
    body = await response.json();
  } catch {
    // non-JSON error bodies are fine; status carries the meaning
  }
  if (!response.ok) {
    throw new ApiError(response.status, body);
  }
  return body as T;
}

export class NelsApi {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  // Terms go to the server verbatim: the backend owns normalization.
  async search(term: string, limit?: number): Promise<SearchResponse> {
    const params = new URLSearchParams({ q: term });
    if (limit !== undefined) params.set('limit', String(limit));
    const response = await this.fetchFn(`${this.baseUrl}/search?${params}`);
    return parseOrThrow<SearchResponse>(response);
  }

  async vote(segmentId: string, classLabel: string, verdict: Verdict): Promise<FeedbackResponse> {
    const response = await this.fetchFn(`${this.baseUrl}/feedback`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ segment_id: segmentId, class: classLabel, verdict }),
    });
    return parseOrThrow<FeedbackResponse>(response);
  }

  async classify(url: string): Promise<ClassifyResponse> {
    const params = new URLSearchParams({ url });
    const response = await this.fetchFn(`${this.baseUrl}/classify?${params}`);
    return parseOrThrow<ClassifyResponse>(response);
  }

  async stats(): Promise<StatsResponse> {
    const response = await this.fetchFn(`${this.baseUrl}/stats`);
    return parseOrThrow<StatsResponse>(response);
  }
}
