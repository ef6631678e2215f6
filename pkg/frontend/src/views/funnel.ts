// Preprocessing results: one bar per stage showing surviving documents and
// tokens, plus the rejection-reason breakdown. Bar heights mirror the
// report and only ever shrink stage over stage.

import { escapeHtml } from "../format.js";
import { StageReport } from "../types.js";

function stageRow(stage: string, documents: number, tokens: number, max: number): string {
  const width = max > 0 ? ((tokens / max) * 100).toFixed(1) : "0.0";
  return `
    <div class="stage-row">
      <span class="stage-name">${escapeHtml(stage)}</span>
      <div class="bar-track"><div class="bar" style="width:${width}%"></div></div>
      <span class="stage-docs" data-documents="${documents}">${documents} docs</span>
      <span class="stage-tokens" data-tokens="${tokens}">${tokens} tokens</span>
    </div>`;
}

function pendingRow(stage: string): string {
  return `
    <div class="stage-row pending">
      <span class="stage-name">${escapeHtml(stage)}</span>
      <div class="bar-track"></div>
      <span class="stage-state">pending</span>
    </div>`;
}

export function renderFunnel(report: StageReport): string {
  if (report.status === "failed") {
    return `
<section class="funnel" data-submission="${escapeHtml(report.submission_id)}">
  <h2>Submission ${escapeHtml(report.submission_id)}</h2>
  <div class="banner banner-error">processing failed: ${escapeHtml(report.error ?? "unknown error")}</div>
</section>`.trim();
  }

  const max = Math.max(...report.stages.map((s) => s.tokens ?? 0), 0);
  const rows = report.stages
    .map((entry) =>
      entry.pending
        ? pendingRow(entry.stage)
        : stageRow(entry.stage, entry.documents ?? 0, entry.tokens ?? 0, max)
    )
    .join("");

  const reasons = Object.keys(report.rejections).sort();
  const rejectionList =
    reasons.length === 0
      ? '<p class="no-rejections">no documents were rejected</p>'
      : `<ul class="rejections">${reasons
          .map(
            (reason) =>
              `<li><span class="reason">${escapeHtml(reason)}</span>` +
              `<span class="count" data-count="${report.rejections[reason]}">${report.rejections[reason]}</span></li>`
          )
          .join("")}</ul>`;

  return `
<section class="funnel" data-submission="${escapeHtml(report.submission_id)}" data-status="${escapeHtml(report.status)}">
  <h2>Submission ${escapeHtml(report.submission_id)} <em class="status">${escapeHtml(report.status)}</em></h2>
  <div class="stages">${rows}
  </div>
  <h3>Rejections</h3>
  ${rejectionList}
  <p class="summary">accepted <strong data-accepted-docs="${report.accepted_documents}">${report.accepted_documents}</strong> documents,
  <strong data-accepted-tokens="${report.accepted_tokens}">${report.accepted_tokens}</strong> tokens credited</p>
</section>`.trim();
}
