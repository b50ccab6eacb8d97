/**
 * Single-key bindings for the rater console.
 */

import { Label } from "./api.js";

export const LABEL_KEYS: Record<string, Label> = {
  "1": "CC",
  "2": "CS",
  "3": "CB",
  "4": "X",
  "5": "WL",
  "6": "NL",
  "7": "U",
  x: "X",
  w: "WL",
  n: "NL",
  u: "U",
};

export type Toggle = "porn" | "offensive";

export const TOGGLE_KEYS: Record<string, Toggle> = {
  p: "porn",
  o: "offensive",
};

export const HELP_KEY = "h";
export const NOTE_KEY = "e";

export const KEY_LEGEND: ReadonlyArray<[string, string]> = [
  ["1", "CC correct, natural"],
  ["2", "CS correct, short"],
  ["3", "CB correct, boilerplate"],
  ["4 / x", "X wrong translation (parallel only)"],
  ["5 / w", "WL wrong language"],
  ["6 / n", "NL not language"],
  ["7 / u", "U unknown"],
  ["p", "toggle porn flag"],
  ["o", "toggle offensive flag"],
  ["e", "edit note"],
  ["h", "toggle help"],
];
