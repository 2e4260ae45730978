/**
 * Feed state: polling, filtering, and optimistic review actions.
 *
 * The server is the single source of truth. Records are kept exactly in the
 * order the API returned them (the service already ranks by fused score);
 * the store never re-sorts and never recomputes a score. Review actions
 * update the card immediately, then reconcile with the server's acknowledged
 * record, reverting and surfacing the server's error verbatim on failure.
 */

import { ApiError, CuratorClient } from "./api.js";
import type { FeedFilter, HighlightRecord, ReviewStatus } from "./types.js";

export interface FeedState {
  records: HighlightRecord[];
  /** Ids first seen on the most recent poll. */
  newIds: ReadonlySet<string>;
  lastSync: Date | null;
  /** True when the last poll failed; records are the last good snapshot. */
  stale: boolean;
  /** Last action error message, verbatim from the server; null when clear. */
  actionError: string | null;
  filter: FeedFilter;
}

export type Listener = (state: FeedState) => void;

export const DEFAULT_POLL_INTERVAL_MS = 5000;

export class FeedStore {
  private records: HighlightRecord[] = [];
  private newIds = new Set<string>();
  private lastSync: Date | null = null;
  private stale = false;
  private actionError: string | null = null;
  private filter: FeedFilter = {};
  private listeners = new Set<Listener>();
  private timer: ReturnType<typeof setInterval> | null = null;
  private seenIds = new Set<string>();
  private primed = false; // the first poll of a view defines the baseline

  constructor(
    private readonly client: CuratorClient,
    readonly pollIntervalMs: number = DEFAULT_POLL_INTERVAL_MS,
  ) {}

  state(): FeedState {
    return {
      records: [...this.records],
      newIds: new Set(this.newIds),
      lastSync: this.lastSync,
      stale: this.stale,
      actionError: this.actionError,
      filter: { ...this.filter },
    };
  }

  subscribe(listener: Listener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private notify(): void {
    const snapshot = this.state();
    for (const listener of this.listeners) listener(snapshot);
  }

  start(): void {
    if (this.timer !== null) return;
    void this.refresh();
    this.timer = setInterval(() => void this.refresh(), this.pollIntervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  /** One poll tick: fetch the filtered feed, mark arrivals, update sync state. */
  async refresh(): Promise<void> {
    try {
      const records = await this.client.queryHighlights(this.filter);
      this.newIds = this.primed
        ? new Set(records.filter((r) => !this.seenIds.has(r.id)).map((r) => r.id))
        : new Set();
      for (const r of records) this.seenIds.add(r.id);
      this.primed = true;
      this.records = records; // server order, verbatim
      this.lastSync = new Date();
      this.stale = false;
    } catch {
      this.stale = true; // keep the previous list and lastSync untouched
    }
    this.notify();
  }

  setFilter(filter: FeedFilter): Promise<void> {
    this.filter = { ...filter };
    this.seenIds = new Set(); // a new view: nothing counts as "new arrival"
    this.newIds = new Set();
    this.primed = false;
    return this.refresh();
  }

  clearActionError(): void {
    this.actionError = null;
    this.notify();
  }

  /**
   * Optimistic review: flip the badge locally, then reconcile with the
   * server's acknowledged record. On rejection the badge reverts and the
   * server's message is surfaced verbatim.
   */
  async review(id: string, status: ReviewStatus): Promise<void> {
    const index = this.records.findIndex((r) => r.id === id);
    if (index < 0) return;
    const before = this.records[index];
    this.records[index] = { ...before, review_status: status };
    this.actionError = null;
    this.notify();
    try {
      const acknowledged = await this.client.review(id, status);
      const at = this.records.findIndex((r) => r.id === id);
      if (at >= 0) this.records[at] = acknowledged;
    } catch (error) {
      const at = this.records.findIndex((r) => r.id === id);
      if (at >= 0) this.records[at] = before;
      this.actionError =
        error instanceof ApiError ? error.message : String(error);
    }
    this.notify();
  }
}
