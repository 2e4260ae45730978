/** Test fixtures: mocked API payloads and a stubbed service. */

import type { FetchLike } from "../src/api.js";
import type { HighlightRecord, ReviewStatus } from "../src/types.js";

const PLAYERS = ["Sergio Garcia", "Daniel Berger", "Justin Rose", "Rickie Fowler"];

export function makeRecord(i: number, overrides: Partial<HighlightRecord> = {}): HighlightRecord {
  const boutStart = 96000 + i * 120000;
  return {
    id: `c1-${boutStart}`,
    channel: "c1",
    t_start: boutStart - 61000,
    t_end: boutStart + 9500,
    bout: { t_start: boutStart, t_end: boutStart + 6000, score: 0.9 - i * 0.05 },
    components: {
      cheer: 0.9 - i * 0.05,
      tone: 0.4 + (i % 3) * 0.1,
      text: i % 2 ? 0.8 : 0,
      action: 0.3 + (i % 4) * 0.1,
    },
    fused_score: 0.85 - i * 0.06,
    player: PLAYERS[i % PLAYERS.length],
    hole: 1 + (i % 18),
    graphic_time: boutStart - 56000,
    shared_graphic: false,
    review_status: "new",
    created_at: "2024-04-14T18:00:00+00:00",
    ...overrides,
  };
}

export function makeFeed(n: number): HighlightRecord[] {
  return Array.from({ length: n }, (_, i) => makeRecord(i));
}

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

const LEGAL: Record<ReviewStatus, ReviewStatus[]> = {
  new: ["reviewed", "rejected"],
  reviewed: ["published", "rejected"],
  published: [],
  rejected: [],
};

/**
 * In-memory stand-in for the curation service. Applies the documented
 * QueryFilter semantics and review-transition rules so dashboard behavior
 * can be asserted without a live server.
 */
export class StubService {
  records: HighlightRecord[];
  requests: string[] = [];
  failNextQuery = false;

  constructor(records: HighlightRecord[]) {
    this.records = records.map((r) => ({ ...r }));
  }

  fetch: FetchLike = async (input, init) => {
    this.requests.push(input);
    const url = new URL(input, "http://stub");
    if (this.failNextQuery && url.pathname === "/highlights") {
      this.failNextQuery = false;
      throw new TypeError("network down");
    }

    const review = url.pathname.match(/^\/highlights\/([^/]+)\/review$/);
    if (review && init?.method === "POST") {
      const id = decodeURIComponent(review[1]);
      const record = this.records.find((r) => r.id === id);
      if (!record) {
        return jsonResponse(404, {
          code: "unknown_id",
          field: "id",
          message: `no highlight with id '${id}'`,
        });
      }
      const { status } = JSON.parse(String(init.body)) as { status: ReviewStatus };
      if (!LEGAL[record.review_status].includes(status)) {
        return jsonResponse(409, {
          code: "illegal_transition",
          field: "status",
          message: `cannot move ${id} from '${record.review_status}' to '${status}'`,
        });
      }
      record.review_status = status;
      return jsonResponse(200, record);
    }

    if (url.pathname === "/highlights") {
      let out = this.records.slice();
      const player = url.searchParams.get("player");
      const hole = url.searchParams.get("hole");
      const minScore = url.searchParams.get("min_score");
      const status = url.searchParams.get("status");
      const limit = url.searchParams.get("limit");
      if (player !== null) out = out.filter((r) => r.player === player);
      if (hole !== null) out = out.filter((r) => r.hole === Number(hole));
      if (minScore !== null) out = out.filter((r) => r.fused_score >= Number(minScore));
      if (status !== null) out = out.filter((r) => r.review_status === status);
      if (limit !== null) out = out.slice(0, Number(limit));
      return jsonResponse(200, out);
    }

    if (url.pathname === "/players") {
      const names = [...new Set(this.records.map((r) => r.player).filter(Boolean))];
      return jsonResponse(200, names.sort());
    }

    if (url.pathname === "/health") {
      return jsonResponse(200, { status: "ok" });
    }
    return jsonResponse(404, { code: "not_found", message: url.pathname });
  };
}
