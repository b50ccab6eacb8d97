/**
 * Scripted end-to-end session against the real annotation service.
 *
 * Spawns `python3 -m crawlaudit.cli serve` on an ephemeral port, creates
 * a 10-item monolingual project over HTTP, and drives the session
 * controller with raw key presses exactly as the keyboard layer would.
 */

import { ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, ApiError, Submission } from "../src/api.js";
import { MemoryStore, SubmissionQueue } from "../src/queue.js";
import { Session } from "../src/session.js";

let server: ChildProcess;
let base: string;
let workdir: string;

async function waitForReady(url: string, timeoutMs = 15000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${url}/projects`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 100));
  }
  throw new Error(`service at ${url} did not come up`);
}

beforeAll(async () => {
  workdir = mkdtempSync(join(tmpdir(), "crawlaudit-ui-"));
  server = spawn(
    "python3",
    ["-m", "crawlaudit.cli", "serve", "--root", join(workdir, "root"),
     "--port", "0"],
    { stdio: ["ignore", "pipe", "inherit"] },
  );
  base = await new Promise<string>((resolve, reject) => {
    const timer = setTimeout(() => reject(new Error("no startup line")), 15000);
    server.stdout!.on("data", (chunk: Buffer) => {
      const match = /http:\/\/[\d.]+:(\d+)/.exec(chunk.toString());
      if (match) {
        clearTimeout(timer);
        resolve(`http://127.0.0.1:${match[1]}`);
      }
    });
  });
  await waitForReady(base);
});

afterAll(() => {
  server?.kill();
});

async function createProject(name: string, lines: string[], n = 100):
    Promise<string> {
  const corpus = join(workdir, `${name}.txt`);
  writeFileSync(corpus, lines.join("\n") + "\n", "utf-8");
  const response = await fetch(`${base}/projects`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ name, corpus, kind: "mono", lang: "en",
                           n, seed: 7 }),
  });
  expect(response.status).toBe(201);
  const body = (await response.json()) as { id: string };
  return body.id;
}

describe("scripted rater session", () => {
  it("labels 10 items via key bindings, X-on-monolingual is refused, export matches", async () => {
    const lines = Array.from({ length: 10 }, (_, i) => `audit sentence ${i}`);
    const pid = await createProject("kbd-session", lines, 10);
    const api = new ApiClient(base);

    let session = await Session.join(api, pid, "kim", new MemoryStore());
    expect(session.manifest.kind).toBe("mono");
    expect(session.manifest.instructions).toContain("CC");
    expect(session.current?.src).toBe("audit sentence 0");

    // first four items: CC, then a refused X attempt followed by WL,
    // then CS with the porn flag, then CB with the offensive flag
    expect(session.handleKey("1")).toBe(true);

    const itemBeforeX = session.current?.id;
    expect(session.handleKey("x")).toBe(true);
    expect(session.state.hint).toContain("disabled for monolingual");
    expect(session.current?.id).toBe(itemBeforeX); // no advance, no submission
    session.handleKey("5");

    session.handleKey("p");
    expect(session.state.porn).toBe(true);
    session.handleKey("2");
    expect(session.state.porn).toBe(false); // flags reset after submission

    session.handleKey("o");
    session.setNote("looks auto-generated");
    session.handleKey("3");

    await session.flushQueue();

    // mid-session refresh: a brand new session sees only what the server
    // has not yet recorded for this rater, and nothing is lost
    session = await Session.join(api, pid, "kim", new MemoryStore());
    const progress = session.state.progress!;
    expect(progress.raters.kim.labeled).toBe(4);
    expect(session.current?.src).toBe("audit sentence 4");

    for (const key of ["6", "n", "w", "1", "2", "3"]) {
      session.handleKey(key);
    }
    await session.flushQueue();
    expect(session.state.done).toBe(true);
    expect(session.state.queueSize).toBe(0);

    const final = await api.getProgress(pid);
    expect(final.raters.kim.labeled).toBe(10);
    expect(final.raters.kim.remaining).toBe(0);

    // the export holds exactly the 10 records the keyboard produced
    const exportText = await api.exportJsonl(pid);
    const exportLines = exportText.trim().split("\n");
    const manifest = JSON.parse(exportLines[0]).manifest;
    expect(manifest.n_records).toBe(10);
    const records = exportLines.slice(1).map((line) => JSON.parse(line));
    expect(records.length).toBe(10);
    expect(records.map((r) => r.label)).toEqual(
      ["CC", "WL", "CS", "CB", "NL", "NL", "WL", "CC", "CS", "CB"]);
    expect(records.map((r) => r.rater).every((r) => r === "kim")).toBe(true);
    expect(records[2].porn).toBe(true);
    expect(records[3].offensive).toBe(true);
    expect(records[3].note).toBe("looks auto-generated");
    expect(records.filter((r) => r.label === "X")).toEqual([]);
    expect(records.map((r) => r.src)).toEqual(lines);
  });

  it("delivers submissions made while disconnected exactly once", async () => {
    const lines = Array.from({ length: 6 }, (_, i) => `offline line ${i}`);
    const pid = await createProject("offline-session", lines, 6);
    const api = new ApiClient(base);
    const session = await Session.join(api, pid, "os", new MemoryStore());

    const realFetch = globalThis.fetch;
    globalThis.fetch = (() => {
      throw new TypeError("network down");
    }) as typeof fetch;
    try {
      session.handleKey("1");
      session.handleKey("6");
      session.handleKey("2");
      await session.flushQueue();
      expect(session.state.queueSize).toBe(3);
      expect(session.state.offline).toBe(true);
    } finally {
      globalThis.fetch = realFetch;
    }

    await session.flushQueue(); // reconnect
    await session.flushQueue(); // no double delivery
    const progress = await api.getProgress(pid);
    expect(progress.total_records).toBe(3);
    expect(progress.raters.os.labeled).toBe(3);
    expect(session.state.queueSize).toBe(0);
  });

  it("surfaces a server rejection inline without losing the queue", async () => {
    const lines = Array.from({ length: 3 }, (_, i) => `reject line ${i}`);
    const pid = await createProject("reject-session", lines, 3);
    const api = new ApiClient(base);

    const rejected: string[] = [];
    const delivered: string[] = [];
    const queue = new SubmissionQueue(
      (s: Submission) => api.postAnnotation(pid, s),
      {
        onRejected: (_s, message) => rejected.push(message),
        onDelivered: (s) => delivered.push(s.id),
      },
      "reject.r",
      new MemoryStore(),
    );
    const items = await api.getItems(pid, "r");
    // bypass the client-side X guard to prove the server-side contract
    queue.enqueue({ id: items[0].id, rater: "r", label: "X",
                    porn: false, offensive: false });
    queue.enqueue({ id: items[1].id, rater: "r", label: "CC",
                    porn: false, offensive: false });
    await queue.flush();
    expect(rejected.length).toBe(1);
    expect(rejected[0]).toContain("monolingual");
    expect(delivered).toEqual([items[1].id]);

    const progress = await api.getProgress(pid);
    expect(progress.total_records).toBe(1);
  });

  it("resubmission through the session wins at export", async () => {
    const lines = ["only line"];
    const pid = await createProject("resubmit-session", lines, 1);
    const api = new ApiClient(base);

    let session = await Session.join(api, pid, "rr", new MemoryStore());
    session.handleKey("1"); // CC
    await session.flushQueue();

    // the rater reconsiders: direct resubmission of the same item
    await api.postAnnotation(pid, { id: "0", rater: "rr", label: "NL",
                                    porn: false, offensive: false });
    const exportText = await api.exportJsonl(pid);
    const records = exportText.trim().split("\n").slice(1)
      .map((line) => JSON.parse(line));
    expect(records.length).toBe(1);
    expect(records[0].label).toBe("NL");

    // and the item no longer shows up for that rater
    session = await Session.join(api, pid, "rr", new MemoryStore());
    expect(session.state.done).toBe(true);
  });

  it("api errors carry the server message", async () => {
    const api = new ApiClient(base);
    await expect(api.getProject("ghost")).rejects.toSatisfy((error: unknown) =>
      error instanceof ApiError && error.status === 404
      && error.message.includes("unknown project"));
  });
});
