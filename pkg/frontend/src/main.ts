/**
 * Entry point: join form, then the labeling console.
 */

import { ApiClient } from "./api.js";
import { Session } from "./session.js";
import { mount } from "./view.js";

function formValue(form: HTMLFormElement, name: string): string {
  const input = form.elements.namedItem(name) as HTMLInputElement;
  return input.value.trim();
}

async function join(form: HTMLFormElement, root: HTMLElement): Promise<void> {
  const base = formValue(form, "server") || "http://127.0.0.1:8765";
  const projectId = formValue(form, "project");
  const raterId = formValue(form, "rater");
  if (!projectId || !raterId) return;
  const api = new ApiClient(base);
  try {
    const session = await Session.join(api, projectId, raterId);
    window.localStorage.setItem(
      "crawlaudit.lastJoin",
      JSON.stringify({ base, projectId, raterId }),
    );
    form.hidden = true;
    mount(root, session);
  } catch (error) {
    const banner = document.getElementById("join-error");
    if (banner) banner.textContent = `could not join: ${String(error)}`;
  }
}

function init(): void {
  const form = document.getElementById("join-form") as HTMLFormElement | null;
  const root = document.getElementById("console");
  if (!form || !root) return;

  const last = window.localStorage.getItem("crawlaudit.lastJoin");
  if (last) {
    try {
      const saved = JSON.parse(last) as Record<string, string>;
      for (const name of ["server", "project", "rater"]) {
        const input = form.elements.namedItem(name) as HTMLInputElement | null;
        if (input && saved[name === "server" ? "base" : name]) {
          input.value = saved[name === "server" ? "base" : name];
        }
      }
    } catch {
      // stale saved state; ignore
    }
  }

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    void join(form, root);
  });
}

init();
