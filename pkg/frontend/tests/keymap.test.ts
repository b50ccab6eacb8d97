import { describe, expect, it } from "vitest";

import { KEY_LEGEND, LABEL_KEYS, TOGGLE_KEYS } from "../src/keymap.js";

describe("key bindings", () => {
  it("every label is reachable from a single key", () => {
    const labels = new Set(Object.values(LABEL_KEYS));
    expect(labels).toEqual(new Set(["CC", "CS", "CB", "X", "WL", "NL", "U"]));
  });

  it("digit row covers the full taxonomy in order", () => {
    expect(["1", "2", "3", "4", "5", "6", "7"].map((k) => LABEL_KEYS[k]))
      .toEqual(["CC", "CS", "CB", "X", "WL", "NL", "U"]);
  });

  it("letter aliases do not collide with toggles", () => {
    const letters = Object.keys(LABEL_KEYS).filter((k) => /[a-z]/.test(k));
    for (const key of letters) {
      expect(TOGGLE_KEYS[key]).toBeUndefined();
    }
  });

  it("legend documents both flag toggles", () => {
    const meanings = KEY_LEGEND.map(([, meaning]) => meaning).join(" ");
    expect(meanings).toContain("porn");
    expect(meanings).toContain("offensive");
  });
});
