/**
 * DOM rendering for the review dashboard.
 *
 * Every number shown is read verbatim from the API payload; the client never
 * recomputes or rounds a score. Cards render in the exact order the server
 * returned. The stacked bar splits the fused score into its weighted parts
 * for display, using the engine's published default weights purely as
 * presentation geometry.
 */

import type { FeedState } from "./store.js";
import type { FeedFilter, HighlightRecord, ReviewStatus } from "./types.js";
import { clipLocator } from "./types.js";

export interface Handlers {
  onFilter(filter: FeedFilter): void;
  onReview(id: string, status: ReviewStatus): void;
}

/** Default fusion weights, used only to draw the breakdown bar segments. */
const DISPLAY_WEIGHTS = { cheer: 0.61, tone: 0.13, text: 0.13, action: 0.13 } as const;

const COMPONENT_KEYS = ["cheer", "tone", "text", "action"] as const;

const ACTIONS: ReviewStatus[] = ["reviewed", "published", "rejected"];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [name, value] of Object.entries(attrs)) {
    if (name === "class") node.className = value;
    else node.setAttribute(name, value);
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

function seconds(ms: number): string {
  return `${ms / 1000}s`;
}

function renderBanner(state: FeedState): HTMLElement | null {
  if (!state.stale) return null;
  const since = state.lastSync
    ? `last sync ${state.lastSync.toISOString()}`
    : "never synced";
  return el("div", { class: "banner stale", role: "alert" }, [
    `Connection lost; showing stale data (${since})`,
  ]);
}

function renderToast(state: FeedState): HTMLElement | null {
  if (state.actionError === null) return null;
  return el("div", { class: "toast error", role: "alert" }, [state.actionError]);
}

function renderFilters(state: FeedState, handlers: Handlers): HTMLElement {
  const player = el("input", {
    class: "filter-player",
    placeholder: "player",
    value: state.filter.player ?? "",
  });
  const hole = el("input", {
    class: "filter-hole",
    placeholder: "hole",
    type: "number",
    min: "1",
    max: "18",
    value: state.filter.hole !== undefined ? String(state.filter.hole) : "",
  });
  const minScore = el("input", {
    class: "filter-min-score",
    placeholder: "min score",
    type: "number",
    step: "0.05",
    min: "0",
    max: "1",
    value: state.filter.min_score !== undefined ? String(state.filter.min_score) : "",
  });
  const apply = el("button", { class: "filter-apply" }, ["Apply"]);
  apply.addEventListener("click", () => {
    const next: FeedFilter = { ...state.filter };
    delete next.player;
    delete next.hole;
    delete next.min_score;
    if (player.value.trim()) next.player = player.value.trim();
    if (hole.value.trim()) next.hole = Number(hole.value);
    if (minScore.value.trim()) next.min_score = Number(minScore.value);
    handlers.onFilter(next);
  });
  return el("div", { class: "filters" }, [player, hole, minScore, apply]);
}

function renderBreakdown(record: HighlightRecord): HTMLElement {
  const fused = record.fused_score;
  const bar = el("div", { class: "breakdown" });
  for (const key of COMPONENT_KEYS) {
    const part = DISPLAY_WEIGHTS[key] * record.components[key];
    const width = fused > 0 ? (part / fused) * 100 : 0;
    bar.append(
      el("span", {
        class: `part part-${key}`,
        style: `width:${width.toFixed(2)}%`,
        title: key,
      }),
    );
  }
  return bar;
}

function renderCard(
  record: HighlightRecord,
  isNew: boolean,
  handlers: Handlers,
): HTMLElement {
  const who = record.player ?? "(unknown player)";
  const hole = record.hole !== null ? ` · hole ${record.hole}` : "";
  const header = el("div", { class: "card-header" }, [
    el("span", { class: "player" }, [who + hole]),
    el("span", { class: `badge status-${record.review_status}` }, [
      record.review_status,
    ]),
    ...(isNew ? [el("span", { class: "badge new-marker" }, ["new"])] : []),
  ]);

  const scores = el("div", { class: "scores" }, [
    el("span", { class: "fused", title: "fused score" }, [String(record.fused_score)]),
    ...COMPONENT_KEYS.map((key) =>
      el("span", { class: `component component-${key}`, title: key }, [
        String(record.components[key]),
      ]),
    ),
  ]);

  const meta = el("div", { class: "meta" }, [
    el("span", { class: "times" }, [
      `${seconds(record.t_start)} – ${seconds(record.t_end)}`,
    ]),
    el("a", { class: "clip", href: clipLocator(record) }, ["clip"]),
    el("span", { class: "channel" }, [record.channel]),
  ]);

  const actions = el("div", { class: "actions" });
  for (const status of ACTIONS) {
    if (status === record.review_status) continue;
    const button = el("button", { class: `action action-${status}` }, [status]);
    button.addEventListener("click", () => handlers.onReview(record.id, status));
    actions.append(button);
  }

  const card = el("article", { class: "card", "data-id": record.id }, [
    header,
    scores,
    renderBreakdown(record),
    meta,
    actions,
  ]);
  return card;
}

/** Full re-render of the dashboard into `container`. */
export function render(
  container: HTMLElement,
  state: FeedState,
  handlers: Handlers,
): void {
  container.textContent = "";
  const banner = renderBanner(state);
  if (banner) container.append(banner);
  const toast = renderToast(state);
  if (toast) container.append(toast);
  container.append(renderFilters(state, handlers));

  const feed = el("section", { class: "feed" });
  for (const record of state.records) {
    feed.append(renderCard(record, state.newIds.has(record.id), handlers));
  }
  if (state.records.length === 0) {
    feed.append(el("p", { class: "empty" }, ["No highlights match this view."]));
  }
  container.append(feed);
}
