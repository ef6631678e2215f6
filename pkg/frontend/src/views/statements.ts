// Payout statements: per-epoch reward lines with a usage drill-down.
// Every monetary cell is a server integer rendered verbatim; the only
// client-side arithmetic is the displayed cross-footing *check*, which
// sums server integers with BigInt and reports agreement or mismatch.

import { escapeHtml, money, shortDate } from "../format.js";
import { EpochSummary, Statement, UsageResponse } from "../types.js";

function crossFootCheck(statement: Statement): string {
  const lineSum = statement.lines.reduce((acc, line) => acc + BigInt(line.reward_minor), 0n);
  const balanced = lineSum + BigInt(statement.undistributed_minor) === BigInt(statement.pool_minor);
  return balanced
    ? '<span class="check check-ok">lines cross-foot to the pool</span>'
    : '<span class="check check-bad">cross-foot MISMATCH - contact the operator</span>';
}

function drilldownCheck(statement: Statement, usage: UsageResponse): string {
  const bucketSum = usage.buckets.reduce((acc, bucket) => acc + BigInt(bucket.amount_minor), 0n);
  const balanced = bucketSum === BigInt(statement.revenue_total_minor);
  return balanced
    ? '<span class="check check-ok">usage drill-down sums to the revenue total</span>'
    : '<span class="check check-bad">usage drill-down MISMATCH</span>';
}

function usageRows(usage: UsageResponse, currency: string): string {
  return usage.buckets
    .map((bucket) => {
      const endpoints = Object.keys(bucket.endpoints)
        .sort()
        .map(
          (name) =>
            `${escapeHtml(name)} (${bucket.endpoints[name].request_count} requests)`
        )
        .join(", ");
      return `
      <tr>
        <td>${escapeHtml(bucket.day)}</td>
        <td data-events="${bucket.event_count}">${bucket.event_count}</td>
        <td class="amount">${money(bucket.amount_minor, currency)}</td>
        <td class="endpoints">${endpoints}</td>
      </tr>`;
    })
    .join("");
}

export function renderStatement(statement: Statement, usage: UsageResponse): string {
  const lines = statement.lines
    .map(
      (line) => `
      <tr>
        <td class="contributor">${escapeHtml(line.contributor_id)}</td>
        <td data-tokens="${line.tokens}">${line.tokens}</td>
        <td class="amount">${money(line.reward_minor, statement.currency)}</td>
      </tr>`
    )
    .join("");

  const undistributed = statement.no_contributions
    ? `<p class="note">no contributions this epoch; the pool of ${money(
        statement.undistributed_minor,
        statement.currency
      )} stays with the consumer</p>`
    : "";

  return `
<article class="statement" data-epoch="${statement.epoch_id}">
  <h3>Epoch ${statement.epoch_id} - closed ${shortDate(statement.closed_at)}</h3>
  <dl class="statement-head">
    <dt>period</dt><dd>${shortDate(statement.period_start)} to ${shortDate(statement.period_end)}</dd>
    <dt>revenue total</dt><dd>${money(statement.revenue_total_minor, statement.currency)}</dd>
    <dt>revenue share</dt><dd>${statement.alpha_ppm} ppm</dd>
    <dt>contributor pool</dt><dd>${money(statement.pool_minor, statement.currency)}</dd>
    <dt>token total</dt><dd data-tokens="${statement.token_total}">${statement.token_total}</dd>
  </dl>
  ${undistributed}
  <table class="lines">
    <thead><tr><th>contributor</th><th>tokens</th><th>reward</th></tr></thead>
    <tbody>${lines}
    </tbody>
  </table>
  <p>${crossFootCheck(statement)}</p>
  <h4>Usage detail</h4>
  <table class="usage">
    <thead><tr><th>day</th><th>events</th><th>amount</th><th>endpoints</th></tr></thead>
    <tbody>${usageRows(usage, statement.currency)}
    </tbody>
  </table>
  <p>${drilldownCheck(statement, usage)}</p>
</article>`.trim();
}

export function renderStatements(
  epochs: EpochSummary[],
  selected: Statement | null,
  usage: UsageResponse | null
): string {
  const closed = epochs.filter((epoch) => epoch.status === "closed");
  if (closed.length === 0) {
    return `
<section class="statements">
  <div class="empty-state">No closed epochs yet - the first payout statement appears after the current epoch closes.</div>
</section>`.trim();
  }
  const list = closed
    .map(
      (epoch) =>
        `<li><a href="#/statements/${epoch.epoch_id}">epoch ${epoch.epoch_id}</a> ` +
        `${shortDate(epoch.period_start)} to ${shortDate(epoch.period_end)}</li>`
    )
    .join("");
  const detail = selected && usage ? renderStatement(selected, usage) : "";
  return `
<section class="statements">
  <ul class="epoch-list">${list}</ul>
  ${detail}
</section>`.trim();
}
