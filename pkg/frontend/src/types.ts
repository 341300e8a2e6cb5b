// Wire types mirroring the review service's documented JSON bodies.

export interface Overlay {
  bbox2d: [number, number, number, number]; // x, y, w, h in image pixels
  color: string;
}

export interface QuestionItem {
  id: string;
  task: string;
  prompt: string;
  choices: Array<string | number>;
  answer_index: number;
  overlays: Overlay[];
  status: string;
  edited_answer: number | null;
  source: string | null;
  image_url?: string | null;
}

export interface ItemsPage {
  items: QuestionItem[];
  total: number;
  page: number;
  size: number;
  pages: number;
}

export interface Stats {
  pending: number;
  accepted: number;
  modified: number;
  rejected: number;
  total: number;
}

export type DecisionKind = "accepted" | "modified" | "rejected";

export interface DecisionBody {
  decision: DecisionKind;
  edited_answer?: number | null;
  edited_choices?: Array<string | number> | null;
  edited_prompt?: string | null;
  idempotency_key?: string;
}

export interface DecisionAck {
  item_id: string;
  status: string;
  duplicate: boolean;
}
