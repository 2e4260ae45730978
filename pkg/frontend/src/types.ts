/** Server JSON shapes, mirrored field-for-field from the curation service. */

export type ReviewStatus = "new" | "reviewed" | "published" | "rejected";

export interface ComponentScores {
  cheer: number;
  tone: number;
  text: number;
  action: number;
}

export interface Bout {
  t_start: number;
  t_end: number;
  score: number;
}

export interface HighlightRecord {
  id: string;
  channel: string;
  t_start: number;
  t_end: number;
  bout: Bout;
  components: ComponentScores;
  fused_score: number;
  player: string | null;
  hole: number | null;
  graphic_time: number;
  shared_graphic: boolean;
  review_status: ReviewStatus;
  created_at: string;
}

/** Query parameters accepted by GET /highlights; maps 1:1 onto the server filter. */
export interface FeedFilter {
  player?: string;
  hole?: number;
  min_score?: number;
  channel?: string;
  status?: ReviewStatus;
  limit?: number;
}

/** Machine-readable error body returned by the service. */
export interface ApiErrorBody {
  code: string;
  field?: string;
  message: string;
}

/**
 * External clip locator for a record. The dashboard stores no media; this is
 * a reference string an external player resolves.
 */
export function clipLocator(record: HighlightRecord): string {
  return `clip://${record.channel}/${record.t_start}-${record.t_end}`;
}
