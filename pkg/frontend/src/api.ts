// Thin client for the four review-service endpoints.

import type { DecisionAck, DecisionBody, ItemsPage, Stats } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

export class ReviewApi {
  constructor(
    private baseUrl: string,
    private reviewer: string,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, init);
    const body = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      throw new ApiError(resp.status, (body as { error?: string }).error ?? resp.statusText);
    }
    return body as T;
  }

  listItems(status = "pending", page = 1, size = 50): Promise<ItemsPage> {
    const params = new URLSearchParams({ status, page: String(page), size: String(size) });
    return this.request<ItemsPage>(`/items?${params}`);
  }

  submitDecision(itemId: string, body: DecisionBody): Promise<DecisionAck> {
    return this.request<DecisionAck>(`/items/${encodeURIComponent(itemId)}/decision`, {
      method: "POST",
      headers: {
        "Content-Type": "application/json",
        "X-Reviewer": this.reviewer,
      },
      body: JSON.stringify(body),
    });
  }

  stats(): Promise<Stats> {
    return this.request<Stats>("/stats");
  }

  exportBenchmark(allowPending = false): Promise<unknown> {
    return this.request(`/export?allow_pending=${allowPending}`);
  }
}
