/**
 * DOM rendering for the rater console.
 *
 * Item text is rendered with dir="auto" so right-to-left scripts display
 * with their natural directionality. Key presses inside inputs and
 * textareas never trigger label bindings.
 */

import { Item } from "./api.js";
import { KEY_LEGEND, NOTE_KEY } from "./keymap.js";
import { Session, SessionState } from "./session.js";

const IGNORED_TAGS = new Set(["INPUT", "TEXTAREA", "SELECT"]);

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function textBlock(title: string, lang: string, text: string): HTMLElement {
  const block = el("div", "text-block");
  block.appendChild(el("div", "text-block-title", `${title} (${lang})`));
  const body = el("div", "text-block-body", text);
  body.setAttribute("dir", "auto");
  body.setAttribute("lang", lang);
  block.appendChild(body);
  return block;
}

function itemCard(item: Item, kind: string): HTMLElement {
  const card = el("div", "item-card");
  const [srcLang, tgtLang] = item.lang.includes("-")
    ? [item.lang.slice(0, item.lang.indexOf("-")),
       item.lang.slice(item.lang.indexOf("-") + 1)]
    : [item.lang, item.lang];
  if (kind === "parallel" && item.tgt !== undefined) {
    card.appendChild(textBlock("source", srcLang, item.src));
    card.appendChild(textBlock("target", tgtLang, item.tgt));
  } else {
    card.appendChild(textBlock("sentence", item.lang, item.src));
  }
  card.appendChild(el("div", "item-id", `item ${item.id}`));
  return card;
}

function legend(kind: string): HTMLElement {
  const box = el("div", "legend");
  for (const [key, meaning] of KEY_LEGEND) {
    const disabled = kind === "mono" && meaning.startsWith("X ");
    const row = el("div", disabled ? "legend-row disabled" : "legend-row");
    row.appendChild(el("span", "legend-key", key));
    row.appendChild(el("span", "legend-meaning",
                       disabled ? `${meaning} (disabled here)` : meaning));
    box.appendChild(row);
  }
  return box;
}

export function render(root: HTMLElement, state: SessionState): void {
  root.textContent = "";
  const app = el("div", "app");

  const header = el("div", "header");
  header.appendChild(el("span", "project-name",
                        `${state.manifest.corpus} / ${state.manifest.id}`));
  header.appendChild(el("span", "rater-name", `rater: ${state.raterId}`));
  const mine = state.progress?.raters[state.raterId];
  const total = state.progress?.total_items ?? state.manifest.n_items;
  header.appendChild(el("span", "progress",
                        `${mine?.labeled ?? 0} / ${total} labeled`));
  if (state.queueSize > 0) {
    header.appendChild(el("span", "queue", `${state.queueSize} queued`));
  }
  app.appendChild(header);

  if (state.offline) {
    app.appendChild(el("div", "banner offline",
                       "offline: submissions are queued and will be "
                       + "delivered after reconnect"));
  }
  if (state.lastRejection) {
    app.appendChild(el("div", "banner rejection",
                       `rejected by server: ${state.lastRejection}`));
  }
  if (state.hint) {
    app.appendChild(el("div", "banner hint", state.hint));
  }

  if (state.current) {
    app.appendChild(itemCard(state.current, state.manifest.kind));
    const flags = el("div", "flags");
    flags.appendChild(el("span", state.porn ? "flag on" : "flag",
                         `porn: ${state.porn ? "on" : "off"}`));
    flags.appendChild(el("span", state.offensive ? "flag on" : "flag",
                         `offensive: ${state.offensive ? "on" : "off"}`));
    app.appendChild(flags);

    const note = el("textarea", "note") as HTMLTextAreaElement;
    note.placeholder = `optional note (press ${NOTE_KEY} to focus, Esc to leave)`;
    note.value = state.note;
    app.appendChild(note);
  } else {
    app.appendChild(el("div", "done",
                       state.queueSize > 0
                         ? "all items labeled; waiting for queued submissions"
                         : "all items labeled, thank you"));
  }

  app.appendChild(legend(state.manifest.kind));

  if (state.showHelp) {
    const help = el("div", "help-panel");
    const pre = el("pre", "instructions", state.manifest.instructions);
    help.appendChild(pre);
    app.appendChild(help);
  }

  root.appendChild(app);
}

/** Wire the session to a root element and the window keyboard. */
export function mount(root: HTMLElement, session: Session): void {
  session.onChange((state) => render(root, state));

  window.addEventListener("keydown", (event: KeyboardEvent) => {
    const target = event.target as HTMLElement | null;
    if (target && (IGNORED_TAGS.has(target.tagName) || target.isContentEditable)) {
      if (event.key === "Escape") (target as HTMLTextAreaElement).blur();
      return;
    }
    if (event.key === NOTE_KEY) {
      event.preventDefault();
      session.handleKey(event.key);
      const note = root.querySelector<HTMLTextAreaElement>("textarea.note");
      note?.focus();
      return;
    }
    if (session.handleKey(event.key)) {
      event.preventDefault();
    }
  });

  root.addEventListener("input", (event) => {
    const target = event.target as HTMLElement;
    if (target instanceof HTMLTextAreaElement && target.classList.contains("note")) {
      session.setNote(target.value);
    }
  });

  window.addEventListener("online", () => void session.flushQueue());
  setInterval(() => void session.flushQueue(), 5000);

  render(root, session.state);
}
