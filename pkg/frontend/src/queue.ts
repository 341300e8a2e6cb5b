// Offline decision buffer: at-least-once resend made safe by idempotency keys.
//
// Every decision gets a key (item id + session id + monotonic counter) the
// first time it is enqueued; resends reuse the same key, so the server's
// dedupe guarantees the journal records it exactly once however many times
// the flush retries.

import type { ReviewApi } from "./api.js";
import type { DecisionBody } from "./types.js";

export interface BufferedDecision {
  itemId: string;
  body: DecisionBody; // idempotency_key is filled in at enqueue time
}

export interface QueueStorage {
  load(): BufferedDecision[];
  save(queue: BufferedDecision[]): void;
}

export class MemoryStorage implements QueueStorage {
  private queue: BufferedDecision[] = [];
  load(): BufferedDecision[] {
    return [...this.queue];
  }
  save(queue: BufferedDecision[]): void {
    this.queue = [...queue];
  }
}

export class LocalStorageQueue implements QueueStorage {
  constructor(private key = "review-ui:pending-decisions") {}
  load(): BufferedDecision[] {
    try {
      const raw = localStorage.getItem(this.key);
      return raw ? (JSON.parse(raw) as BufferedDecision[]) : [];
    } catch {
      return [];
    }
  }
  save(queue: BufferedDecision[]): void {
    try {
      localStorage.setItem(this.key, JSON.stringify(queue));
    } catch {
      // storage unavailable; the in-memory copy still drives this session
    }
  }
}

export class OfflineQueue {
  private queue: BufferedDecision[];
  private counter = 0;
  private flushing = false;

  constructor(
    private api: ReviewApi,
    private sessionId: string,
    private storage: QueueStorage = new MemoryStorage(),
  ) {
    this.queue = storage.load();
  }

  get size(): number {
    return this.queue.length;
  }

  nextKey(itemId: string): string {
    this.counter += 1;
    return `${itemId}:${this.sessionId}:${this.counter}`;
  }

  enqueue(itemId: string, body: DecisionBody): void {
    if (!body.idempotency_key) {
      body = { ...body, idempotency_key: this.nextKey(itemId) };
    }
    this.queue.push({ itemId, body });
    this.storage.save(this.queue);
  }

  /** Send everything buffered, in order; stops at the first failure. */
  async flush(): Promise<number> {
    if (this.flushing) return 0;
    this.flushing = true;
    let sent = 0;
    try {
      while (this.queue.length > 0) {
        const head = this.queue[0];
        await this.api.submitDecision(head.itemId, head.body); // throws on failure
        this.queue.shift();
        this.storage.save(this.queue);
        sent += 1;
      }
    } finally {
      this.flushing = false;
    }
    return sent;
  }
}
