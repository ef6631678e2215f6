// Landing page: the four account metrics, the payout countdown, and a
// revenue-trend sparkline fed by /revenue/usage.

import { countdown, escapeHtml, money, shortDate } from "../format.js";
import { EpochSummary, MetricsResponse, UsageResponse } from "../types.js";

export interface OverviewModel {
  metrics: MetricsResponse;
  openEpoch: EpochSummary;
  usage: UsageResponse;
  currency: string;
  stale: boolean;
}

function sparkline(usage: UsageResponse): string {
  const buckets = usage.buckets;
  if (buckets.length === 0) {
    return '<div class="spark-empty">no usage recorded in this window</div>';
  }
  const max = Math.max(...buckets.map((b) => b.amount_minor));
  const width = 240;
  const height = 48;
  const step = buckets.length > 1 ? width / (buckets.length - 1) : 0;
  const points = buckets
    .map((bucket, i) => {
      const x = buckets.length > 1 ? i * step : width / 2;
      const y = max > 0 ? height - (bucket.amount_minor / max) * (height - 4) : height;
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(" ");
  return (
    `<svg class="sparkline" viewBox="0 0 ${width} ${height}" role="img" ` +
    `aria-label="daily revenue trend">` +
    `<polyline fill="none" stroke="currentColor" stroke-width="2" points="${points}"/></svg>`
  );
}

export function renderOverview(model: OverviewModel): string {
  const m = model.metrics.metrics;
  const banner = model.stale
    ? '<div class="banner banner-stale">API unreachable - showing last known figures</div>'
    : "";
  return `
${banner}
<section class="overview" data-as-of="${escapeHtml(model.metrics.as_of)}">
  <div class="cards">
    <article class="card">
      <h3>Contribution ratio</h3>
      <p class="figure">${escapeHtml(m.contribution_ratio)}</p>
    </article>
    <article class="card">
      <h3>Contribution token count</h3>
      <p class="figure" data-tokens="${m.contribution_token_count}">${m.contribution_token_count}</p>
    </article>
    <article class="card">
      <h3>Current monetary reward</h3>
      <p class="figure">${money(m.current_monetary_reward_minor, model.currency)}</p>
    </article>
    <article class="card">
      <h3>Expected payout</h3>
      <p class="figure">${money(m.expected_payout_minor, model.currency)}</p>
    </article>
  </div>
  <footer class="epoch-line">
    <span>epoch ${model.openEpoch.epoch_id}: ${shortDate(model.openEpoch.period_start)} to ${shortDate(model.openEpoch.period_end)}</span>
    <span class="countdown">${countdown(model.metrics.as_of, model.openEpoch.period_end)}</span>
    ${sparkline(model.usage)}
  </footer>
</section>`.trim();
}
