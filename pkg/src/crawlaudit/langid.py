"""Character n-gram language identification and sentence-pair filtering.

A small, fully deterministic stand-in for production LangID models: per
language, add-alpha smoothed character n-gram tables (orders 1-4 by
default). A text's score for a language is the mean over orders of the
per-gram average log probability. Texts shorter than min_text_length get
a low-confidence prediction, which filtering treats as a mismatch.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from statistics import median
from typing import Iterable, Mapping, Sequence

from .corpus_io import SentencePair
from .langtags import RulesDatabase, TagParseError, default_rules, parse_tag
from .taxonomy import AnnotationLabel, AnnotationRecord

MODEL_FORMAT_VERSION = 1

#: labels meaning "both sides are in their declared languages"
DETECTION_POSITIVE = frozenset({AnnotationLabel.CC, AnnotationLabel.CS,
                                AnnotationLabel.CB, AnnotationLabel.X})
CORRECT_LABELS = frozenset({AnnotationLabel.CC, AnnotationLabel.CS,
                            AnnotationLabel.CB})


@dataclass
class LangIdModel:
    languages: tuple[str, ...]
    orders: tuple[int, ...]
    alpha: float
    min_text_length: int
    # counts[lang][order][gram] -> int
    counts: dict[str, dict[int, dict[str, int]]]
    _totals: dict[str, dict[int, int]] = field(default_factory=dict, repr=False)
    _vocab_sizes: dict[int, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._totals = {
            lang: {order: sum(grams.values())
                   for order, grams in per_order.items()}
            for lang, per_order in self.counts.items()
        }
        self._vocab_sizes = {}
        for order in self.orders:
            vocab = set()
            for per_order in self.counts.values():
                vocab.update(per_order.get(order, ()))
            # one extra slot reserves smoothed mass for unseen grams
            self._vocab_sizes[order] = len(vocab) + 1

    def log_prob(self, lang: str, order: int, gram: str) -> float:
        c = self.counts[lang].get(order, {}).get(gram, 0)
        total = self._totals[lang].get(order, 0)
        denom = total + self.alpha * self._vocab_sizes[order]
        return math.log((c + self.alpha) / denom)


@dataclass(frozen=True)
class Prediction:
    lang: str
    score: float
    confident: bool


@dataclass(frozen=True)
class FilterDecision:
    pair_id: str
    src_pred: str
    src_score: float
    tgt_pred: str
    tgt_score: float
    kept: bool
    evaluable: bool = True


@dataclass
class FilterMetrics:
    """Detection quality of the keep decision plus retention of correct pairs.

    Detection treats pairs labeled CC/CS/CB/X as positives (both declared
    languages present) and WL/NL as negatives. Retention precision is the
    share of kept pairs labeled correct; retention recall is the share of
    correct pairs that were kept. Undefined ratios are None, never 0.
    """

    n_pairs: int
    detection_precision: float | None
    detection_recall: float | None
    retention_precision: float | None
    retention_recall: float | None
    n_unevaluable: int = 0
    n_unresolved: int = 0
    per_language: dict[str, "FilterMetrics"] = field(default_factory=dict)
    noisy_median_retention_precision: float | None = None
    noisy_median_retention_recall: float | None = None


def _grams(text: str, order: int) -> list[str]:
    return [text[i:i + order] for i in range(len(text) - order + 1)]


def train(corpora: Mapping[str, Iterable[str]] | Iterable[tuple[str, Iterable[str]]],
          alpha: float = 1.0, orders: Sequence[int] = (1, 2, 3, 4),
          min_text_length: int = 20, min_chars: int = 1000) -> LangIdModel:
    """Train per-language n-gram tables. Deterministic given its inputs."""
    pairs = list(corpora.items()) if isinstance(corpora, Mapping) else list(corpora)
    seen: set[str] = set()
    for lang, _ in pairs:
        if lang in seen:
            raise ValueError(f"duplicate language key: {lang}")
        seen.add(lang)
    if len(pairs) < 2:
        raise ValueError("need at least 2 languages to train")
    counts: dict[str, dict[int, dict[str, int]]] = {}
    for lang, stream in pairs:
        text = "\n".join(s.rstrip() for s in stream)
        if len(text) < min_chars:
            raise ValueError(
                f"not enough training text for {lang!r}: {len(text)} chars "
                f"(need {min_chars})")
        per_order: dict[int, dict[str, int]] = {}
        for order in orders:
            grams: dict[str, int] = {}
            for g in _grams(text, order):
                grams[g] = grams.get(g, 0) + 1
            per_order[order] = grams
        counts[lang] = per_order
    return LangIdModel(languages=tuple(sorted(seen)), orders=tuple(orders),
                       alpha=alpha, min_text_length=min_text_length,
                       counts=counts)


def score(model: LangIdModel, text: str, lang: str) -> float:
    """Mean over orders of the per-gram average log probability."""
    text = text.rstrip()
    order_scores = []
    for order in model.orders:
        grams = _grams(text, order)
        if not grams:
            continue
        total = sum(model.log_prob(lang, order, g) for g in grams)
        order_scores.append(total / len(grams))
    if not order_scores:
        return -math.inf
    return sum(order_scores) / len(order_scores)


def predict(model: LangIdModel, text: str) -> Prediction:
    """Best language under the model; low-confidence for short texts."""
    if not text:
        raise ValueError("empty text")
    stripped = text.rstrip()
    best_lang, best_score = "", -math.inf
    for lang in model.languages:
        s = score(model, stripped, lang)
        if s > best_score:
            best_lang, best_score = lang, s
    confident = len(stripped) >= model.min_text_length
    return Prediction(lang=best_lang, score=best_score, confident=confident)


def resolve_declared(tag: str, dataset: str | None = None,
                     rules: RulesDatabase | None = None) -> str | None:
    """Map a published tag to a model language.

    Normalizes the tag and applies single-suggestion code corrections
    (nonstandard or deprecated codes) so mislabeled declarations do not
    poison the evaluation. Returns None when the tag cannot be resolved.
    """
    rules = rules or default_rules()
    try:
        parsed = parse_tag(tag)
    except TagParseError:
        return None
    language = parsed.language
    keys = {language, tag.strip().lower().replace("_", "-")}
    for rule in rules._matching(dataset, ("NONSTANDARD", "DEPRECATED"), keys):
        if len(rule.suggestions) == 1:
            try:
                language = parse_tag(rule.suggestions[0]).language
            except TagParseError:
                return None
            break
    return language


def filter_corpus(model: LangIdModel, pairs: Iterable[SentencePair],
                  dataset: str | None = None,
                  rules: RulesDatabase | None = None) -> list[FilterDecision]:
    """Keep a pair iff both sides are predicted as their declared language.

    Low-confidence predictions count as mismatches. Pairs whose declared
    tags do not resolve to model languages are marked unevaluable.
    """
    rules = rules or default_rules()
    decisions = []
    for pair in pairs:
        src_lang = resolve_declared(pair.src_lang, dataset, rules)
        tgt_lang = resolve_declared(pair.tgt_lang, dataset, rules)
        if (src_lang not in model.languages) or (tgt_lang not in model.languages):
            decisions.append(FilterDecision(
                pair_id=pair.id, src_pred="", src_score=-math.inf,
                tgt_pred="", tgt_score=-math.inf, kept=False, evaluable=False))
            continue
        sp = predict(model, pair.src_text)
        tp = predict(model, pair.tgt_text)
        kept = (sp.confident and tp.confident
                and sp.lang == src_lang and tp.lang == tgt_lang)
        decisions.append(FilterDecision(
            pair_id=pair.id, src_pred=sp.lang, src_score=sp.score,
            tgt_pred=tp.lang, tgt_score=tp.score, kept=kept))
    return decisions


def _ratio(num: int, denom: int) -> float | None:
    return None if denom == 0 else num / denom


def _metrics_for(pairs: list[tuple[bool, AnnotationLabel]]) -> FilterMetrics:
    tp = fp = fn = tn = 0
    kept_c = total_c = kept = 0
    for was_kept, label in pairs:
        positive = label in DETECTION_POSITIVE
        correct = label in CORRECT_LABELS
        if was_kept:
            kept += 1
            if positive:
                tp += 1
            else:
                fp += 1
            if correct:
                kept_c += 1
        else:
            if positive:
                fn += 1
            else:
                tn += 1
        if correct:
            total_c += 1
    return FilterMetrics(
        n_pairs=len(pairs),
        detection_precision=_ratio(tp, tp + fp),
        detection_recall=_ratio(tp, tp + fn),
        retention_precision=_ratio(kept_c, kept),
        retention_recall=_ratio(kept_c, total_c),
    )


def filter_eval(annotations: Mapping[str, AnnotationRecord],
                decisions: Sequence[FilterDecision],
                pair_langs: Mapping[str, str] | None = None) -> FilterMetrics:
    """Score filter decisions against human labels.

    Every evaluable decision must be annotated. When pair_langs maps ids
    to a language, per-language metrics and the median over noisy
    languages (under 50% correct) are included.
    """
    usable: list[tuple[bool, AnnotationLabel]] = []
    by_lang: dict[str, list[tuple[bool, AnnotationLabel]]] = {}
    n_unevaluable = n_unresolved = 0
    for d in decisions:
        if not d.evaluable:
            n_unevaluable += 1
            continue
        if d.pair_id not in annotations:
            raise ValueError(f"decision for unannotated pair: {d.pair_id}")
        label = annotations[d.pair_id].label
        if label is AnnotationLabel.U:
            n_unresolved += 1
            continue
        usable.append((d.kept, label))
        if pair_langs is not None and d.pair_id in pair_langs:
            by_lang.setdefault(pair_langs[d.pair_id], []).append((d.kept, label))

    metrics = _metrics_for(usable)
    metrics.n_unevaluable = n_unevaluable
    metrics.n_unresolved = n_unresolved
    if by_lang:
        metrics.per_language = {lang: _metrics_for(rows)
                                for lang, rows in sorted(by_lang.items())}
        noisy = []
        for lang, rows in sorted(by_lang.items()):
            n_correct = sum(1 for _, label in rows if label in CORRECT_LABELS)
            if 100 * n_correct < 50 * len(rows):
                noisy.append(metrics.per_language[lang])
        precisions = [m.retention_precision for m in noisy
                      if m.retention_precision is not None]
        recalls = [m.retention_recall for m in noisy
                   if m.retention_recall is not None]
        if precisions:
            metrics.noisy_median_retention_precision = median(precisions)
        if recalls:
            metrics.noisy_median_retention_recall = median(recalls)
    return metrics


# ---------------------------------------------------------------------------
# serialization (stable text format, exact round-trip)

def save_model(model: LangIdModel, path: str | Path) -> None:
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "alpha": model.alpha,
        "orders": list(model.orders),
        "min_text_length": model.min_text_length,
        "languages": list(model.languages),
        "counts": {lang: {str(order): grams
                          for order, grams in sorted(per_order.items())}
                   for lang, per_order in sorted(model.counts.items())},
    }
    Path(path).write_text(json.dumps(payload, ensure_ascii=False,
                                     sort_keys=True), encoding="utf-8")


def load_model(path: str | Path) -> LangIdModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format: "
                         f"{payload.get('format_version')!r}")
    counts = {lang: {int(order): dict(grams)
                     for order, grams in per_order.items()}
              for lang, per_order in payload["counts"].items()}
    return LangIdModel(languages=tuple(payload["languages"]),
                       orders=tuple(payload["orders"]),
                       alpha=payload["alpha"],
                       min_text_length=payload["min_text_length"],
                       counts=counts)
