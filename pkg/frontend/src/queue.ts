/**
 * FIFO submission queue with offline tolerance.
 *
 * A submission leaves the queue only after the server acknowledged it
 * (delivered) or explicitly refused it (rejected, surfaced to the UI).
 * Network failures keep the head in place, so flushing after a reconnect
 * delivers every queued submission exactly once and in order. The queue
 * is persisted, which makes a mid-session refresh lossless even while
 * offline.
 */

import { ApiError, Submission } from "./api.js";

export type SendFn = (submission: Submission) => Promise<void>;

export interface QueueEvents {
  onDelivered?: (submission: Submission) => void;
  onRejected?: (submission: Submission, message: string) => void;
  onOffline?: () => void;
}

/** Minimal localStorage-shaped persistence; tests inject a memory map. */
export interface KeyValueStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export class MemoryStore implements KeyValueStore {
  private map = new Map<string, string>();
  getItem(key: string) {
    return this.map.get(key) ?? null;
  }
  setItem(key: string, value: string) {
    this.map.set(key, value);
  }
  removeItem(key: string) {
    this.map.delete(key);
  }
}

function defaultStore(): KeyValueStore {
  const g = globalThis as { localStorage?: KeyValueStore };
  return g.localStorage ?? new MemoryStore();
}

export class SubmissionQueue {
  private pending: Submission[] = [];
  private inflight: Promise<void> | null = null;
  private readonly storageKey: string;

  constructor(
    private readonly send: SendFn,
    private readonly events: QueueEvents = {},
    scope = "default",
    private readonly store: KeyValueStore = defaultStore(),
  ) {
    this.storageKey = `crawlaudit.queue.${scope}`;
    const saved = this.store.getItem(this.storageKey);
    if (saved) {
      try {
        this.pending = JSON.parse(saved) as Submission[];
      } catch {
        this.pending = [];
      }
    }
  }

  get size(): number {
    return this.pending.length;
  }

  snapshot(): readonly Submission[] {
    return [...this.pending];
  }

  enqueue(submission: Submission): void {
    this.pending.push(submission);
    this.persist();
    void this.flush();
  }

  /**
   * Drain in order; stops at the first network failure. Concurrent calls
   * share the in-flight drain, so awaiting flush() always means "the
   * queue did all it could right now".
   */
  flush(): Promise<void> {
    if (!this.inflight) {
      this.inflight = this.drain().finally(() => {
        this.inflight = null;
      });
    }
    return this.inflight;
  }

  private async drain(): Promise<void> {
    while (this.pending.length > 0) {
      const head = this.pending[0];
      try {
        await this.send(head);
      } catch (error) {
        if (error instanceof ApiError) {
          // the server saw it and said no: drop it, surface it, go on
          this.pending.shift();
          this.persist();
          this.events.onRejected?.(head, error.message);
          continue;
        }
        this.events.onOffline?.();
        return;
      }
      this.pending.shift();
      this.persist();
      this.events.onDelivered?.(head);
    }
  }

  private persist(): void {
    if (this.pending.length === 0) {
      this.store.removeItem(this.storageKey);
    } else {
      this.store.setItem(this.storageKey, JSON.stringify(this.pending));
    }
  }
}
