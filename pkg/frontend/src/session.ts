/**
 * Rater session controller, independent of the DOM.
 *
 * All state is reconstructible from the server: joining fetches the
 * project manifest, the rater's unlabeled items and the progress
 * snapshot, so a refresh resumes exactly where the log says the rater
 * is. Submissions flow through the persistent offline queue.
 */

import { ApiClient, Item, Label, Manifest, Progress, Submission } from "./api.js";
import { HELP_KEY, LABEL_KEYS, NOTE_KEY, TOGGLE_KEYS } from "./keymap.js";
import { KeyValueStore, SubmissionQueue } from "./queue.js";

const BATCH_SIZE = 25;

export interface SessionState {
  manifest: Manifest;
  raterId: string;
  current: Item | null;
  queueSize: number;
  progress: Progress | null;
  offline: boolean;
  hint: string | null;
  lastRejection: string | null;
  porn: boolean;
  offensive: boolean;
  note: string;
  showHelp: boolean;
  done: boolean;
}

export type SessionListener = (state: SessionState) => void;

export class Session {
  private items: Item[] = [];
  private cursor = 0;
  private porn = false;
  private offensive = false;
  private note = "";
  private showHelp = false;
  private offline = false;
  private hint: string | null = null;
  private lastRejection: string | null = null;
  private progress: Progress | null = null;
  private listeners: SessionListener[] = [];
  private readonly queue: SubmissionQueue;

  private constructor(
    private readonly api: ApiClient,
    readonly manifest: Manifest,
    readonly raterId: string,
    store?: KeyValueStore,
  ) {
    this.queue = new SubmissionQueue(
      (submission) => this.api.postAnnotation(this.manifest.id, submission),
      {
        onDelivered: () => {
          this.offline = false;
          void this.refreshProgress();
        },
        onRejected: (submission, message) => {
          this.lastRejection = `${submission.label} on ${submission.id}: ${message}`;
          this.emit();
        },
        onOffline: () => {
          this.offline = true;
          this.emit();
        },
      },
      `${manifest.id}.${raterId}`,
      store,
    );
  }

  static async join(
    api: ApiClient,
    projectId: string,
    raterId: string,
    store?: KeyValueStore,
  ): Promise<Session> {
    const manifest = await api.getProject(projectId);
    const session = new Session(api, manifest, raterId, store);
    await session.refill();
    await session.refreshProgress();
    // deliver anything a previous page load left behind
    await session.queue.flush();
    return session;
  }

  onChange(listener: SessionListener): void {
    this.listeners.push(listener);
  }

  get state(): SessionState {
    return {
      manifest: this.manifest,
      raterId: this.raterId,
      current: this.current,
      queueSize: this.queue.size,
      progress: this.progress,
      offline: this.offline,
      hint: this.hint,
      lastRejection: this.lastRejection,
      porn: this.porn,
      offensive: this.offensive,
      note: this.note,
      showHelp: this.showHelp,
      done: this.current === null,
    };
  }

  get current(): Item | null {
    return this.items[this.cursor] ?? null;
  }

  /**
   * Route one key press. Label keys submit the current item and advance;
   * X is disabled on monolingual projects. Returns true when handled.
   */
  handleKey(key: string): boolean {
    const normalized = key.length === 1 ? key.toLowerCase() : key;
    this.hint = null;
    if (normalized in TOGGLE_KEYS) {
      const toggle = TOGGLE_KEYS[normalized];
      this[toggle] = !this[toggle];
      this.emit();
      return true;
    }
    if (normalized === HELP_KEY) {
      this.showHelp = !this.showHelp;
      this.emit();
      return true;
    }
    if (normalized === NOTE_KEY) {
      // the view moves focus to the note box; nothing to do here
      this.emit();
      return true;
    }
    const label = LABEL_KEYS[normalized];
    if (!label) return false;
    if (label === "X" && this.manifest.kind === "mono") {
      this.hint = "X (wrong translation) is disabled for monolingual projects";
      this.emit();
      return true;
    }
    this.submitLabel(label);
    return true;
  }

  setNote(text: string): void {
    this.note = text;
  }

  /** Queue the current item with this label and advance to the next one. */
  submitLabel(label: Label): void {
    const item = this.current;
    if (!item) return;
    const submission: Submission = {
      id: item.id,
      rater: this.raterId,
      label,
      porn: this.porn,
      offensive: this.offensive,
    };
    if (this.note.trim()) submission.note = this.note.trim();
    this.queue.enqueue(submission);
    this.cursor += 1;
    this.porn = false;
    this.offensive = false;
    this.note = "";
    this.emit();
    if (this.cursor >= this.items.length) {
      void this.refillMore();
    }
  }

  /** Retry queued submissions (reconnect handler, timers). */
  flushQueue(): Promise<void> {
    return this.queue.flush();
  }

  queuedSubmissions(): readonly Submission[] {
    return this.queue.snapshot();
  }

  private async refill(): Promise<void> {
    this.items = await this.api.getItems(this.manifest.id, this.raterId, BATCH_SIZE);
    this.cursor = 0;
  }

  private async refillMore(): Promise<void> {
    // skip items that are queued but not yet acknowledged by the server
    try {
      const fetched = await this.api.getItems(this.manifest.id, this.raterId, BATCH_SIZE);
      const queuedIds = new Set(this.queue.snapshot().map((s) => s.id));
      const fresh = fetched.filter((item) => !queuedIds.has(item.id));
      if (fresh.length > 0) {
        this.items = fresh;
        this.cursor = 0;
      }
      this.emit();
    } catch {
      // offline; the queue will surface it
    }
  }

  private async refreshProgress(): Promise<void> {
    try {
      this.progress = await this.api.getProgress(this.manifest.id);
    } catch {
      this.progress = this.progress ?? null;
    }
    this.emit();
  }

  private emit(): void {
    const snapshot = this.state;
    for (const listener of this.listeners) listener(snapshot);
  }
}
