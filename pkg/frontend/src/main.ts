/**
 * Dashboard bootstrap: one base-URL setting, a polling feed, full re-render
 * on every state change.
 */

import { CuratorClient } from "./api.js";
import { render } from "./render.js";
import { DEFAULT_POLL_INTERVAL_MS, FeedStore } from "./store.js";

function configuredBaseUrl(): string {
  const meta = document.querySelector('meta[name="fanfare-base-url"]');
  const fromMeta = meta?.getAttribute("content");
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  return (fromQuery ?? fromMeta ?? "http://127.0.0.1:8400").replace(/\/$/, "");
}

function configuredPollInterval(): number {
  const raw = new URLSearchParams(window.location.search).get("poll");
  const parsed = raw !== null ? Number(raw) : NaN;
  return Number.isFinite(parsed) && parsed > 0 ? parsed : DEFAULT_POLL_INTERVAL_MS;
}

export function boot(container: HTMLElement): FeedStore {
  const client = new CuratorClient(configuredBaseUrl());
  const store = new FeedStore(client, configuredPollInterval());
  store.subscribe((state) =>
    render(container, state, {
      onFilter: (filter) => void store.setFilter(filter),
      onReview: (id, status) => void store.review(id, status),
    }),
  );
  store.start();
  return store;
}

if (typeof document !== "undefined") {
  const root = document.getElementById("app");
  if (root) boot(root);
}
