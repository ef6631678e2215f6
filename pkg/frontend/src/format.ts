// Display helpers. Monetary values are rendered verbatim: the text content
// of a .money span is exactly the server's integer, unchanged, so audits
// can diff the page against the API byte for byte.

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function money(valueMinor: number, currency: string): string {
  const literal = String(valueMinor);
  return (
    `<span class="money" data-money="${literal}">${literal}</span>` +
    `<span class="unit"> ${escapeHtml(currency)} minor</span>`
  );
}

export function countdown(fromIso: string, untilIso: string): string {
  const ms = Date.parse(untilIso) - Date.parse(fromIso);
  if (ms <= 0) {
    return "payout due";
  }
  const totalHours = Math.floor(ms / 3_600_000);
  const days = Math.floor(totalHours / 24);
  const hours = totalHours % 24;
  return `${days}d ${hours}h until payout`;
}

export function shortDate(iso: string): string {
  return iso.slice(0, 10);
}
