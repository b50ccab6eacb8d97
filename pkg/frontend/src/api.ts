/**
 * Typed client for the annotation service HTTP+JSON API.
 */

export type ProjectKind = "mono" | "parallel";

export type Label = "CC" | "CS" | "CB" | "X" | "WL" | "NL" | "U";

export interface Manifest {
  id: string;
  corpus: string;
  kind: ProjectKind;
  lang: string | null;
  src_lang: string | null;
  tgt_lang: string | null;
  n_items: number;
  seed: number;
  instructions: string;
}

export interface Item {
  id: string;
  corpus: string;
  lang: string;
  src: string;
  tgt?: string;
}

export interface RaterProgress {
  labeled: number;
  remaining: number;
  labels: Record<string, number>;
}

export interface Progress {
  total_items: number;
  total_records: number;
  raters: Record<string, RaterProgress>;
  unresolved_u: number;
}

export interface Submission {
  id: string;
  rater: string;
  label: Label;
  porn: boolean;
  offensive: boolean;
  note?: string;
}

/** A response the server understood and refused (4xx/5xx). */
export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  // a network failure (server down, disconnect) rejects with TypeError;
  // callers treat everything that is not an ApiError as "offline"
  const response = await fetch(url, {
    ...init,
    headers: { "Content-Type": "application/json", ...init?.headers },
  });
  const text = await response.text();
  if (!response.ok) {
    let message = `HTTP ${response.status}`;
    try {
      message = (JSON.parse(text) as { error: string }).error ?? message;
    } catch {
      // non-JSON error body; keep the status line
    }
    throw new ApiError(response.status, message);
  }
  return (text ? JSON.parse(text) : {}) as T;
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl.replace(/\/$/, "")}${path}`;
  }

  getProject(projectId: string): Promise<Manifest> {
    return request<Manifest>(this.url(`/projects/${projectId}`));
  }

  getItems(projectId: string, rater: string, limit?: number): Promise<Item[]> {
    const query = new URLSearchParams({ rater });
    if (limit !== undefined) query.set("limit", String(limit));
    return request<{ items: Item[] }>(
      this.url(`/projects/${projectId}/items?${query}`),
    ).then((body) => body.items);
  }

  getProgress(projectId: string): Promise<Progress> {
    return request<Progress>(this.url(`/projects/${projectId}/progress`));
  }

  async postAnnotation(projectId: string, submission: Submission): Promise<void> {
    await request(this.url(`/projects/${projectId}/annotations`), {
      method: "POST",
      body: JSON.stringify(submission),
    });
  }

  async exportJsonl(projectId: string): Promise<string> {
    const response = await fetch(this.url(`/projects/${projectId}/export`));
    if (!response.ok) {
      throw new ApiError(response.status, `HTTP ${response.status}`);
    }
    return response.text();
  }
}
