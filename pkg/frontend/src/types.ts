// Response shapes of the documented HTTP API. The dashboard consumes these
// endpoints only; it never recomputes a monetary figure on its own.

export interface MetricsView {
  contribution_ratio: string;
  contribution_token_count: number;
  current_monetary_reward_minor: number;
  expected_payout_minor: number;
}

export interface MetricsResponse {
  contributor_id: string;
  as_of: string;
  metrics: MetricsView;
}

export interface EpochSummary {
  epoch_id: number;
  period_start: string;
  period_end: string;
  status: string;
  alpha_ppm: number;
}

export interface EpochListResponse {
  epochs: EpochSummary[];
}

export interface StageEntry {
  stage: string;
  documents?: number;
  tokens?: number;
  pending?: boolean;
}

export interface StageReport {
  submission_id: string;
  contributor_id: string;
  status: string;
  stages: StageEntry[];
  rejections: Record<string, number>;
  accepted_documents: number;
  accepted_tokens: number;
  received_at: string;
  finalized_at: string | null;
  error?: string;
}

export interface EndpointTally {
  request_count: number;
  amount_minor: number;
}

export interface UsageBucket {
  day: string;
  amount_minor: number;
  event_count: number;
  endpoints: Record<string, EndpointTally>;
}

export interface UsageResponse {
  start: string;
  end: string;
  total_amount_minor: number;
  buckets: UsageBucket[];
}

export interface StatementLine {
  contributor_id: string;
  tokens: number;
  reward_minor: number;
}

export interface Statement {
  epoch_id: number;
  period_start: string;
  period_end: string;
  closed_at: string;
  currency: string;
  alpha_ppm: number;
  revenue_total_minor: number;
  pool_minor: number;
  undistributed_minor: number;
  no_contributions: boolean;
  token_total: number;
  lines: StatementLine[];
}
