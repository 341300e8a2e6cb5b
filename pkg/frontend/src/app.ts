// Review queue state machine: fetch pending items, render one at a time,
// submit decisions (a / m / r), and keep going when the server drops out.

import { ReviewApi } from "./api.js";
import { OfflineQueue, type QueueStorage, MemoryStorage } from "./queue.js";
import { renderItemCard } from "./render.js";
import type { DecisionBody, DecisionKind, QuestionItem, Stats } from "./types.js";

export interface AppElements {
  card: HTMLElement;
  tallies: HTMLElement;
  banner: HTMLElement;
  position: HTMLElement;
  modifyPanel: HTMLElement;
}

const EMPTY_STATS: Stats = { pending: 0, accepted: 0, modified: 0, rejected: 0, total: 0 };

export class ReviewApp {
  readonly queue: OfflineQueue;
  private pending: QuestionItem[] = [];
  private cursor = 0;
  private stats: Stats = EMPTY_STATS;
  private modifyIndex: number | null = null;
  private inModifyFlow = false;

  constructor(
    private api: ReviewApi,
    private el: AppElements,
    sessionId: string = `s-${Date.now().toString(36)}`,
    storage: QueueStorage = new MemoryStorage(),
  ) {
    this.queue = new OfflineQueue(api, sessionId, storage);
  }

  get currentItem(): QuestionItem | null {
    return this.pending[this.cursor] ?? null;
  }

  get queuePosition(): { index: number; total: number } {
    return { index: this.cursor, total: this.pending.length };
  }

  async start(): Promise<void> {
    await this.refresh();
    this.renderCurrent();
  }

  async refresh(): Promise<void> {
    const page = await this.api.listItems("pending", 1, 200);
    this.pending = page.items;
    this.cursor = 0;
    await this.refreshStats();
  }

  async refreshStats(): Promise<void> {
    try {
      this.stats = await this.api.stats();
    } catch {
      // offline: keep the last tallies on screen
    }
    this.renderTallies();
  }

  renderCurrent(): void {
    const item = this.currentItem;
    this.el.modifyPanel.hidden = true;
    this.inModifyFlow = false;
    this.modifyIndex = null;
    if (!item) {
      this.el.card.textContent = "queue drained — nothing pending";
      this.el.position.textContent = "";
      return;
    }
    renderItemCard(item, this.el.card);
    const pos = this.queuePosition;
    this.el.position.textContent = `item ${pos.index + 1} of ${pos.total}`;
  }

  renderTallies(): void {
    const s = this.stats;
    this.el.tallies.textContent =
      `pending ${s.pending} · accepted ${s.accepted} · modified ${s.modified} · rejected ${s.rejected}`;
  }

  handleKey(key: string): void {
    if (this.inModifyFlow) {
      this.handleModifyKey(key);
      return;
    }
    if (key === "a") void this.decide("accepted");
    else if (key === "r") void this.decide("rejected");
    else if (key === "m") this.beginModify();
  }

  beginModify(): void {
    const item = this.currentItem;
    if (!item) return;
    this.inModifyFlow = true;
    this.modifyIndex = null;
    const panel = this.el.modifyPanel;
    panel.hidden = false;
    panel.textContent = "";
    const hint = document.createElement("p");
    hint.textContent = "pick the corrected answer (1-9), then Enter; Esc cancels";
    panel.appendChild(hint);
    const submit = document.createElement("button");
    submit.className = "modify-submit";
    submit.textContent = "submit modification";
    submit.disabled = true; // enabled once an answer is chosen
    submit.addEventListener("click", () => void this.submitModify());
    panel.appendChild(submit);
  }

  private handleModifyKey(key: string): void {
    const item = this.currentItem;
    if (!item) return;
    if (key === "Escape") {
      this.inModifyFlow = false;
      this.modifyIndex = null;
      this.el.modifyPanel.hidden = true;
      return;
    }
    const digit = Number.parseInt(key, 10);
    if (!Number.isNaN(digit) && digit >= 1 && digit <= item.choices.length) {
      this.modifyIndex = digit - 1;
      const submit = this.el.modifyPanel.querySelector<HTMLButtonElement>(".modify-submit");
      if (submit) submit.disabled = false;
    }
    if (key === "Enter" && this.modifyIndex !== null) {
      void this.submitModify();
    }
  }

  private async submitModify(): Promise<void> {
    if (this.modifyIndex === null) return; // submit stays disabled until a choice exists
    await this.decide("modified", { edited_answer: this.modifyIndex });
  }

  async decide(kind: DecisionKind, edits: Partial<DecisionBody> = {}): Promise<void> {
    const item = this.currentItem;
    if (!item) return;
    const body: DecisionBody = {
      decision: kind,
      ...edits,
      idempotency_key: this.queue.nextKey(item.id),
    };
    try {
      await this.api.submitDecision(item.id, body);
      this.setBanner("");
    } catch (err) {
      if (err instanceof Error && "status" in err) {
        // server rejected the decision: keep the item on screen
        this.setBanner(`rejected by server: ${err.message}`);
        return;
      }
      // transport failure: buffer with the same key and move on
      this.queue.enqueue(item.id, body);
      this.setBanner(`offline — ${this.queue.size} decision(s) buffered, will retry`);
    }
    this.advance();
    await this.refreshStats();
  }

  advance(): void {
    this.cursor += 1;
    this.renderCurrent();
  }

  async reconnect(): Promise<number> {
    try {
      const sent = await this.queue.flush();
      if (this.queue.size === 0) this.setBanner("");
      await this.refreshStats();
      return sent;
    } catch {
      this.setBanner(`still offline — ${this.queue.size} decision(s) buffered`);
      return 0;
    }
  }

  setBanner(text: string): void {
    this.el.banner.textContent = text;
    this.el.banner.hidden = text === "";
  }

  attachKeyboard(target: EventTarget = document): void {
    target.addEventListener("keydown", (event) => {
      const e = event as KeyboardEvent;
      const el = e.target as HTMLElement | null;
      if (el && (el.tagName === "INPUT" || el.tagName === "TEXTAREA" || el.isContentEditable)) {
        return;
      }
      this.handleKey(e.key);
    });
  }

  attachConnectivity(target: EventTarget = window): void {
    target.addEventListener("online", () => void this.reconnect());
  }
}
