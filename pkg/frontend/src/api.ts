/** Typed client for the curation service API. */

import type {
  ApiErrorBody,
  FeedFilter,
  HighlightRecord,
  ReviewStatus,
} from "./types.js";

export class ApiError extends Error {
  readonly code: string;
  readonly field?: string;
  readonly status: number;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.code = body.code;
    this.field = body.field;
    this.status = status;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class CuratorClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  /** Build the query string for GET /highlights; one param per filter field. */
  highlightsUrl(filter: FeedFilter): string {
    const params = new URLSearchParams();
    if (filter.player !== undefined) params.set("player", filter.player);
    if (filter.hole !== undefined) params.set("hole", String(filter.hole));
    if (filter.min_score !== undefined) params.set("min_score", String(filter.min_score));
    if (filter.channel !== undefined) params.set("channel", filter.channel);
    if (filter.status !== undefined) params.set("status", filter.status);
    if (filter.limit !== undefined) params.set("limit", String(filter.limit));
    const query = params.toString();
    return `${this.baseUrl}/highlights${query ? "?" + query : ""}`;
  }

  async queryHighlights(filter: FeedFilter = {}): Promise<HighlightRecord[]> {
    return this.request<HighlightRecord[]>(this.highlightsUrl(filter));
  }

  async getHighlight(id: string): Promise<HighlightRecord> {
    return this.request<HighlightRecord>(
      `${this.baseUrl}/highlights/${encodeURIComponent(id)}`,
    );
  }

  async review(id: string, status: ReviewStatus): Promise<HighlightRecord> {
    return this.request<HighlightRecord>(
      `${this.baseUrl}/highlights/${encodeURIComponent(id)}/review`,
      { method: "POST", body: JSON.stringify({ status }) },
    );
  }

  async players(): Promise<string[]> {
    return this.request<string[]>(`${this.baseUrl}/players`);
  }

  async health(): Promise<{ status: string }> {
    return this.request<{ status: string }>(`${this.baseUrl}/health`);
  }

  private async request<T>(url: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(url, init);
    if (!response.ok) {
      let body: ApiErrorBody;
      try {
        body = (await response.json()) as ApiErrorBody;
      } catch {
        body = { code: "http_error", message: `HTTP ${response.status}` };
      }
      throw new ApiError(response.status, body);
    }
    return (await response.json()) as T;
  }
}
