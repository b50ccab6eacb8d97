"""Language-tag parsing, normalization and the code linter.

Implements the language[-script][-region][-x-private...] subset of the
BCP-47 grammar (no extlangs, variants or non-private extensions) plus a
rules database of known per-dataset code problems: nonstandard and
deprecated codes, superset/subset ambiguities, sign-language mislabels,
malformed private-use extensions and equivalent duplicates.

Base language subtags are validated against a shipped snapshot of ISO
639-1/-2/-3 codes so lint results do not depend on external registries.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .resources import data_lines, data_text

log = logging.getLogger(__name__)


class TagParseError(ValueError):
    """Raised when a string does not match the supported tag grammar."""


_LANG_RE = re.compile(r"^[A-Za-z]{2,3}$")
_SCRIPT_RE = re.compile(r"^[A-Za-z]{4}$")
_REGION_RE = re.compile(r"^([A-Za-z]{2}|[0-9]{3})$")
_PRIVATE_RE = re.compile(r"^[A-Za-z0-9]{1,8}$")


@dataclass(frozen=True)
class LanguageTag:
    language: str
    script: str | None = None
    region: str | None = None
    private: tuple[str, ...] = ()
    raw: str = ""
    warnings: tuple[str, ...] = ()


def parse_tag(s: str) -> LanguageTag:
    """Parse a tag; underscores are accepted as separators but flagged."""
    if not s or not s.strip():
        raise TagParseError("empty language tag")
    raw = s.strip()
    warnings = ()
    if "_" in raw:
        warnings = ("underscore separators normalized to hyphens",)
    parts = raw.replace("_", "-").split("-")
    if not _LANG_RE.match(parts[0]):
        raise TagParseError(f"bad language subtag {parts[0]!r} in {raw!r}")
    language = parts[0].lower()
    script = region = None
    private: list[str] = []
    i = 1
    if i < len(parts) and parts[i].lower() != "x" and _SCRIPT_RE.match(parts[i]):
        script = parts[i].title()
        i += 1
    if i < len(parts) and parts[i].lower() != "x" and _REGION_RE.match(parts[i]):
        region = parts[i].upper()
        i += 1
    if i < len(parts):
        if parts[i].lower() != "x":
            raise TagParseError(f"unexpected subtag {parts[i]!r} in {raw!r}")
        privates = parts[i + 1:]
        if not privates:
            raise TagParseError(f"private-use subtags missing after x in {raw!r}")
        for p in privates:
            if not _PRIVATE_RE.match(p):
                raise TagParseError(f"bad private-use subtag {p!r} in {raw!r}")
            private.append(p.lower())
    return LanguageTag(language=language, script=script, region=region,
                       private=tuple(private), raw=raw, warnings=warnings)


def normalize_tag(tag: LanguageTag | str) -> str:
    """Canonical rendering: lowercase-language, Title-script, UPPER-region,
    hyphen separated, private subtags lowercased. Idempotent."""
    if isinstance(tag, str):
        tag = parse_tag(tag)
    parts = [tag.language]
    if tag.script:
        parts.append(tag.script.title())
    if tag.region:
        parts.append(tag.region.upper())
    if tag.private:
        parts.append("x")
        parts.extend(p.lower() for p in tag.private)
    return "-".join(parts)


# ---------------------------------------------------------------------------
# rules database

CATEGORIES = ("NONSTANDARD", "DEPRECATED", "SUPERSET_AMBIGUOUS",
              "SIGN_LANGUAGE_MISLABEL", "MALFORMED_PRIVATE_USE",
              "ISO3_FOR_ISO2", "EQUIVALENT_DUPLICATE")

#: categories counted as "nonstandard code" in lint summaries
NONSTANDARD_SUMMARY_CATEGORIES = frozenset({"NONSTANDARD", "DEPRECATED"})


@dataclass(frozen=True)
class CodeIssue:
    category: str
    observed: str
    suggestions: tuple[str, ...] = ()
    note: str = ""
    source: str = ""
    dataset: str = ""


@dataclass(frozen=True)
class Rule:
    dataset: str  # "*" applies everywhere
    observed: str
    category: str
    suggestions: tuple[str, ...]
    extra: tuple[str, ...]
    note: str


def _key(code: str) -> str:
    return code.strip().lower().replace("_", "-")


#: datasets the shipped rules and code lists know about
KNOWN_DATASETS = ("ccaligned", "paracrawl", "wikimatrix", "oscar", "mc4", "jw300")


@dataclass
class RulesDatabase:
    rules: list[Rule] = field(default_factory=list)
    known_subtags: frozenset[str] = frozenset()
    _warned_datasets: set[str] = field(default_factory=set, repr=False)

    @classmethod
    def load(cls, path: str | Path | None = None,
             snapshot_path: str | Path | None = None) -> "RulesDatabase":
        """Load the shipped rules and ISO snapshot (or overrides).

        Every suggestion is parsed at load time; a bad entry is a data bug
        and fails fast.
        """
        text = (Path(path).read_text(encoding="utf-8") if path is not None
                else data_text("code_rules.csv"))
        snap = (Path(snapshot_path).read_text(encoding="utf-8").splitlines()
                if snapshot_path is not None
                else data_text("iso639_snapshot.txt").splitlines())
        known = frozenset(line.strip().lower() for line in snap
                          if line.strip() and not line.startswith("#"))
        rules: list[Rule] = []
        header_seen = False
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if not header_seen:
                if line != "dataset,observed,category,suggestion,extra,note":
                    raise ValueError(f"unexpected rules header: {line}")
                header_seen = True
                continue
            dataset, observed, category, suggestion, extra, note = line.split(",")
            if category not in CATEGORIES:
                raise ValueError(f"unknown rule category: {category}")
            suggestions = tuple(s for s in suggestion.split("|") if s)
            for s in suggestions:
                parse_tag(s)  # must be a valid tag
            rules.append(Rule(dataset=dataset, observed=observed,
                              category=category, suggestions=suggestions,
                              extra=tuple(e for e in extra.split("|") if e),
                              note=note))
        return cls(rules=rules, known_subtags=known)

    def save(self, path: str | Path) -> None:
        lines = ["# language-code rules database v1",
                 "dataset,observed,category,suggestion,extra,note"]
        for r in self.rules:
            lines.append(",".join([r.dataset, r.observed, r.category,
                                   "|".join(r.suggestions), "|".join(r.extra),
                                   r.note]))
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    def datasets(self) -> set[str]:
        return {r.dataset for r in self.rules if r.dataset != "*"} | set(KNOWN_DATASETS)

    def _matching(self, dataset: str | None, categories: Iterable[str],
                  keys: set[str]) -> Iterable[Rule]:
        agnostic = dataset is None or dataset not in self.datasets()
        if dataset is not None and agnostic and dataset not in self._warned_datasets:
            self._warned_datasets.add(dataset)
            log.warning("unknown dataset %r: applying code rules from all datasets",
                        dataset)
        wanted = set(categories)
        for r in self.rules:
            if r.category not in wanted:
                continue
            if not (agnostic or r.dataset in (dataset, "*")):
                continue
            if _key(r.observed) in keys:
                yield r


_DEFAULT_DB: RulesDatabase | None = None


def default_rules() -> RulesDatabase:
    global _DEFAULT_DB
    if _DEFAULT_DB is None:
        _DEFAULT_DB = RulesDatabase.load()
    return _DEFAULT_DB


def _issue_from(rule: Rule, observed: str) -> CodeIssue:
    return CodeIssue(category=rule.category, observed=observed,
                     suggestions=rule.suggestions, note=rule.note,
                     source=f"{rule.dataset}:{rule.observed}",
                     dataset=rule.dataset)


_PER_CODE_CATEGORIES = ("NONSTANDARD", "DEPRECATED", "SIGN_LANGUAGE_MISLABEL",
                        "MALFORMED_PRIVATE_USE", "ISO3_FOR_ISO2",
                        "EQUIVALENT_DUPLICATE")


def check_code(code: str, dataset: str | None,
               rules: RulesDatabase | None = None) -> list[CodeIssue]:
    """All issues for one published code. Empty list means clean.

    Rule matching considers both the full code and its base language
    subtag, so regioned forms like zz_TR match a rule on zz.
    """
    rules = rules or default_rules()
    keys = {_key(code)}
    parsed: LanguageTag | None = None
    parse_error = ""
    try:
        parsed = parse_tag(code)
        keys.add(parsed.language)
    except TagParseError as e:
        parse_error = str(e)

    issues = [_issue_from(r, code)
              for r in rules._matching(dataset, _PER_CODE_CATEGORIES, keys)]

    if parsed is None and not issues:
        issues.append(CodeIssue(category="MALFORMED_PRIVATE_USE", observed=code,
                                note=f"tag shape outside the supported grammar "
                                     f"({parse_error})",
                                dataset=dataset or ""))
    if parsed is not None and not issues and parsed.language not in rules.known_subtags:
        issues.append(CodeIssue(category="NONSTANDARD", observed=code,
                                note=f"base subtag {parsed.language!r} not in the "
                                     f"ISO 639 snapshot",
                                dataset=dataset or ""))
    return issues


def superset_conflicts(codes: Iterable[str], dataset: str | None,
                       rules: RulesDatabase | None = None) -> list[CodeIssue]:
    """Flag supercodes whose subcodes ship in the same dataset."""
    rules = rules or default_rules()
    present: set[str] = set()
    for code in codes:
        present.add(_key(code))
        try:
            present.add(parse_tag(code).language)
        except TagParseError:
            pass
    issues: list[CodeIssue] = []
    agnostic = dataset is None or dataset not in rules.datasets()
    for r in rules.rules:
        if r.category != "SUPERSET_AMBIGUOUS":
            continue
        if not (agnostic or r.dataset in (dataset, "*")):
            continue
        if _key(r.observed) not in present:
            continue
        found = [sub for sub in r.extra if _key(sub) in present]
        if found:
            issues.append(CodeIssue(
                category="SUPERSET_AMBIGUOUS", observed=r.observed,
                note=f"superset of co-published codes: {', '.join(found)}",
                source=f"{r.dataset}:{r.observed}", dataset=r.dataset))
    return issues


def check_sign_language(code: str, dataset: str | None,
                        rules: RulesDatabase | None = None) -> CodeIssue | None:
    """The sign-language mislabel issue for this code, if any."""
    rules = rules or default_rules()
    keys = {_key(code)}
    for r in rules._matching(dataset, ("SIGN_LANGUAGE_MISLABEL",), keys):
        return _issue_from(r, code)
    return None


@dataclass
class LintReport:
    dataset: str
    codes: list[str]
    issues: list[CodeIssue]

    def issues_by_code(self) -> dict[str, list[CodeIssue]]:
        out: dict[str, list[CodeIssue]] = {}
        for issue in self.issues:
            out.setdefault(issue.observed, []).append(issue)
        return out

    def nonstandard_codes(self) -> list[str]:
        """Distinct codes flagged NONSTANDARD or DEPRECATED."""
        return sorted({i.observed for i in self.issues
                       if i.category in NONSTANDARD_SUMMARY_CATEGORIES})

    def codes_with_category(self, category: str) -> list[str]:
        return sorted({i.observed for i in self.issues if i.category == category})

    def summary(self) -> dict:
        per_category = {c: len(self.codes_with_category(c)) for c in CATEGORIES}
        return {"dataset": self.dataset, "codes": len(self.codes),
                "flagged_codes": len(self.issues_by_code()),
                "nonstandard_codes": len(self.nonstandard_codes()),
                "per_category": per_category}


def lint_codes(codes: Sequence[str], dataset: str | None,
               rules: RulesDatabase | None = None) -> LintReport:
    """check_code over every code plus set-level superset conflicts."""
    rules = rules or default_rules()
    issues: list[CodeIssue] = []
    for code in codes:
        issues.extend(check_code(code, dataset, rules))
    issues.extend(superset_conflicts(codes, dataset, rules))
    return LintReport(dataset=dataset or "", codes=list(codes), issues=issues)


def published_code_list(dataset: str) -> list[str]:
    """The shipped language-code list for a dataset."""
    return data_lines("code_lists", f"{dataset}.txt")
