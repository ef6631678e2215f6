// Thin typed client over the documented HTTP API.

import {
  EpochListResponse,
  EpochSummary,
  MetricsResponse,
  StageReport,
  Statement,
  UsageResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(private baseUrl: string, private token: string) {}

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      headers: { Authorization: `Bearer ${this.token}` },
    });
    if (!response.ok) {
      throw new ApiError(response.status, `GET ${path} failed (${response.status})`);
    }
    return (await response.json()) as T;
  }

  metrics(): Promise<MetricsResponse> {
    return this.get("/metrics");
  }

  openEpoch(): Promise<EpochSummary> {
    return this.get("/epochs/open");
  }

  epochs(): Promise<EpochListResponse> {
    return this.get("/epochs");
  }

  statement(epochId: number): Promise<Statement> {
    return this.get(`/epochs/${epochId}/statement`);
  }

  report(submissionId: string): Promise<StageReport> {
    return this.get(`/submissions/${encodeURIComponent(submissionId)}/report`);
  }

  usage(startIso: string, endIso: string): Promise<UsageResponse> {
    const params = new URLSearchParams({ start: startIso, end: endIso });
    return this.get(`/revenue/usage?${params}`);
  }

  currency(): Promise<string> {
    return this.get<{ currency_code: string }>("/config").then((c) => c.currency_code);
  }
}
