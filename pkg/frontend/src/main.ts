// Browser entry point: hash routing, periodic refresh, stale-data handling.
// On any fetch failure the last rendered figures stay on screen behind a
// stale banner; the dashboard never invents a number.

import { ApiClient } from "./api.js";
import { OverviewModel, renderOverview } from "./views/overview.js";
import { renderFunnel } from "./views/funnel.js";
import { renderStatements } from "./views/statements.js";

const REFRESH_MS = 15_000;

function settings(): { server: string; token: string } {
  const server =
    localStorage.getItem("tokenshare_server") ?? `${location.protocol}//${location.host}`;
  let token = localStorage.getItem("tokenshare_token");
  if (!token) {
    token = window.prompt("API token") ?? "";
    localStorage.setItem("tokenshare_token", token);
  }
  return { server, token };
}

let lastOverview: OverviewModel | null = null;

async function loadOverview(api: ApiClient): Promise<OverviewModel> {
  const [metrics, openEpoch, currency] = await Promise.all([
    api.metrics(),
    api.openEpoch(),
    api.currency(),
  ]);
  const usage = await api.usage(openEpoch.period_start, openEpoch.period_end);
  return { metrics, openEpoch, usage, currency, stale: false };
}

async function showOverview(api: ApiClient, target: HTMLElement): Promise<void> {
  try {
    lastOverview = await loadOverview(api);
    target.innerHTML = renderOverview(lastOverview);
  } catch {
    if (lastOverview) {
      target.innerHTML = renderOverview({ ...lastOverview, stale: true });
    } else {
      target.innerHTML = '<div class="banner banner-stale">API unreachable</div>';
    }
  }
}

async function showFunnel(api: ApiClient, target: HTMLElement, submissionId: string): Promise<void> {
  try {
    target.innerHTML = renderFunnel(await api.report(submissionId));
  } catch {
    target.innerHTML = '<div class="banner banner-stale">could not load the report</div>';
  }
}

async function showStatements(api: ApiClient, target: HTMLElement, epochId?: number): Promise<void> {
  try {
    const epochs = (await api.epochs()).epochs;
    const closed = epochs.filter((e) => e.status === "closed");
    const pick = epochId ?? (closed.length ? closed[closed.length - 1].epoch_id : undefined);
    if (pick === undefined) {
      target.innerHTML = renderStatements(epochs, null, null);
      return;
    }
    const summary = epochs.find((e) => e.epoch_id === pick)!;
    const statement = await api.statement(pick);
    const usage = await api.usage(summary.period_start, summary.period_end);
    target.innerHTML = renderStatements(epochs, statement, usage);
  } catch {
    target.innerHTML = '<div class="banner banner-stale">could not load statements</div>';
  }
}

function route(api: ApiClient, target: HTMLElement): void {
  const hash = location.hash || "#/overview";
  const funnel = hash.match(/^#\/funnel\/(.+)$/);
  const statement = hash.match(/^#\/statements(?:\/(\d+))?$/);
  if (funnel) {
    void showFunnel(api, target, decodeURIComponent(funnel[1]));
  } else if (statement) {
    void showStatements(api, target, statement[1] ? Number(statement[1]) : undefined);
  } else {
    void showOverview(api, target);
  }
}

export function start(): void {
  const { server, token } = settings();
  const api = new ApiClient(server, token);
  const target = document.getElementById("app");
  if (!target) {
    throw new Error("missing #app container");
  }
  route(api, target);
  window.addEventListener("hashchange", () => route(api, target));
  window.setInterval(() => {
    if ((location.hash || "#/overview") === "#/overview") {
      void showOverview(api, target);
    }
  }, REFRESH_MS);
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  start();
}
