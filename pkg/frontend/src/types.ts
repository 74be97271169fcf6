/**
 * Wire types for the annotation service HTTP API.
 *
 * These mirror the server's JSON shapes exactly; the client never adds,
 * renames, or recomputes fields. Model identities never appear here:
 * candidates are addressed by alias only.
 */

export const FEEDBACK_TYPES = ["suggestion", "concern", "confused_question"] as const;
export type FeedbackType = (typeof FEEDBACK_TYPES)[number];

export const CATEGORIES = [
  "larger_defect",
  "validation",
  "logical",
  "interface",
  "solution_approach",
  "question",
  "design_discussion",
  "resource",
  "documentation",
  "organization_of_code",
  "alternate_output",
  "support",
  "timing",
  "naming_convention",
  "praise",
  "visual_representation",
  "false_positives",
  "others",
] as const;
export type Category = (typeof CATEGORIES)[number];

export type Phase = "calibration" | "adjudication" | "solo" | "review" | "closed";

/** The five judgment dimensions for one (sample, alias). */
export interface LabelValues {
  semantic_equivalence: boolean;
  applicability: boolean;
  has_explanation: boolean;
  feedback_type: string | null;
  category: string | null;
}

export interface CandidateView {
  alias: string;
  text: string;
}

export interface ItemView {
  index: number;
  sample_id: string;
  m_pre: string;
  reference: string;
  candidates: CandidateView[];
  prior_labels?: Record<string, LabelValues>;
}

export interface AdjudicationView {
  item_id: string;
  kind: "cal" | "rev";
  sample_id: string;
  alias: string;
  dimensions: string[];
  labels: Record<string, LabelValues>;
  resolution: LabelValues | null;
}

export interface NextPayload {
  phase: Phase;
  item: ItemView | null;
  remaining?: number;
  disagreements?: AdjudicationView[];
  phase_complete?: boolean;
  waiting_for?: string | null;
  closed?: boolean;
}

export interface SessionInfo {
  session_id: string;
  frame: string;
  annotators: string[];
  calibration_size: number;
  phase: Phase;
  items: number;
}

export interface KappaCell {
  kappa: number;
  observed: number;
  expected: number;
  items: number;
}

export interface DimensionKappas {
  [dimension: string]: KappaCell | null;
}

export interface AgreementBatch {
  items: number;
  dimensions: DimensionKappas;
}

export interface AgreementPayload {
  session_id: string;
  units: number;
  dimensions: DimensionKappas;
  batches: AgreementBatch[];
  cumulative: AgreementBatch[];
}

export interface LabelSubmission extends LabelValues {
  annotator: string;
  sample_id: string;
  alias: string;
}

export interface Progress {
  phase: Phase;
  items_done: number;
  items_total: number;
}

export interface SubmitResult {
  ok: boolean;
  progress: Progress;
}
