"""Aggregate statistics over audit annotations.

Percentages are carried as exact fractions internally and rendered to two
decimals only at output boundaries, so macro/micro aggregation and the
strict threshold comparisons cannot drift. The Spearman coefficient uses
average ranks for ties, a Pearson correlation on the ranks, and a
two-sided p-value from the t approximation with n-2 degrees of freedom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .resources import data_text
from .taxonomy import (AnnotationLabel, AnnotationRecord, MONO, PARALLEL,
                       coarsen)

LABEL_KEYS = ("C", "CC", "CS", "CB", "X", "WL", "NL")
FLAG_KEYS = ("offensive", "porn")
ALL_KEYS = LABEL_KEYS + FLAG_KEYS

AUDIT_DATASETS = ("ccaligned", "paracrawl", "wikimatrix", "oscar", "mc4")


@dataclass
class CorpusStats:
    """Per-language label percentages over an audited sample."""

    dataset: str
    lang: str
    n_annotated: int | None
    pct: dict[str, Fraction | None]
    avg_length: float | None = None
    n_unresolved: int = 0
    corpus_sentences: int | None = None


@dataclass
class AggregateStats:
    macro: dict[str, Fraction] | None = None
    micro: dict[str, Fraction] | None = None
    weights: dict[str, Fraction] = field(default_factory=dict)
    excluded: tuple[str, ...] = ()


@dataclass(frozen=True)
class ThresholdCounts:
    zero_c: int
    under50_c: int
    over50_nl: int
    over50_wl: int


@dataclass(frozen=True)
class CorrelationResult:
    rho: float
    p_value: float
    n: int


@dataclass(frozen=True)
class DownstreamScore:
    """Externally supplied translation quality for one language."""

    lang: str
    spbleu: float


def per_language_stats(records: Sequence[AnnotationRecord], kind: str,
                       dataset: str = "", lang: str = "",
                       lengths: Mapping[str, int] | None = None) -> CorpusStats:
    """Label percentages over one language's annotations.

    Records still labeled U are excluded from the denominator and reported
    in n_unresolved. Flags share the label denominator.
    """
    if not records:
        raise ValueError("empty annotation set")
    resolved = [r for r in records if r.label is not AnnotationLabel.U]
    unresolved = len(records) - len(resolved)
    if not resolved:
        raise ValueError("all annotations are unresolved U")
    if kind == MONO and any(r.label is AnnotationLabel.X for r in resolved):
        raise ValueError("label X is not legal for monolingual items")

    denom = len(resolved)
    counts = {key: 0 for key in ALL_KEYS}
    for r in resolved:
        counts[r.label.value] += 1
        if r.offensive:
            counts["offensive"] += 1
        if r.porn:
            counts["porn"] += 1
    counts["C"] = counts["CC"] + counts["CS"] + counts["CB"]

    pct: dict[str, Fraction | None] = {
        key: Fraction(100 * counts[key], denom) for key in ALL_KEYS
    }
    if kind == MONO:
        pct["X"] = None

    avg_length = None
    if lengths:
        sizes = [lengths[r.item_id] for r in resolved if r.item_id in lengths]
        if sizes:
            avg_length = sum(sizes) / len(sizes)
    return CorpusStats(dataset=dataset, lang=lang, n_annotated=denom, pct=pct,
                       avg_length=avg_length, n_unresolved=unresolved)


def _mean(values: Sequence[Fraction]) -> Fraction:
    return sum(values, Fraction(0)) / len(values)


def macro_average(stats: Sequence[CorpusStats]) -> AggregateStats:
    """Unweighted mean of each percentage across languages."""
    if not stats:
        raise ValueError("no per-language stats to aggregate")
    macro: dict[str, Fraction] = {}
    for key in ALL_KEYS:
        values = [s.pct[key] for s in stats if s.pct.get(key) is not None]
        if values:
            macro[key] = _mean(values)
    return AggregateStats(macro=macro)


def micro_average(stats: Sequence[CorpusStats],
                  sizes: Mapping[str, int | None]) -> AggregateStats:
    """Mean weighted by each language's share of the dataset's sentences.

    Languages without a known size are excluded and reported.
    """
    if not stats:
        raise ValueError("no per-language stats to aggregate")
    included = [s for s in stats if sizes.get(s.lang) is not None]
    excluded = tuple(s.lang for s in stats if sizes.get(s.lang) is None)
    if not included:
        raise ValueError("no language has a known size")
    total = sum(sizes[s.lang] for s in included)
    weights = {s.lang: Fraction(sizes[s.lang], total) for s in included}
    micro: dict[str, Fraction] = {}
    for key in ALL_KEYS:
        rows = [s for s in included if s.pct.get(key) is not None]
        if not rows:
            continue
        wsum = sum((weights[s.lang] for s in rows), Fraction(0))
        micro[key] = sum((weights[s.lang] * s.pct[key] for s in rows),
                         Fraction(0)) / wsum
    return AggregateStats(micro=micro, weights=weights, excluded=excluded)


def threshold_summary(stats: Sequence[CorpusStats]) -> ThresholdCounts:
    """Language counts at the audit's quality thresholds.

    Comparisons are strict: exactly-0% C, strictly-under-50% C,
    strictly-over-50% NL and WL.
    """
    zero_c = sum(1 for s in stats if s.pct["C"] == 0)
    under50 = sum(1 for s in stats if s.pct["C"] < 50)
    over_nl = sum(1 for s in stats if (s.pct.get("NL") or 0) > 50)
    over_wl = sum(1 for s in stats if (s.pct.get("WL") or 0) > 50)
    return ThresholdCounts(zero_c, under50, over_nl, over_wl)


def quality_cdf(stats: Sequence[CorpusStats],
                thresholds: Sequence[float]) -> list[tuple[float, Fraction]]:
    """Fraction of languages strictly below each quality threshold."""
    if not stats:
        raise ValueError("no per-language stats")
    if list(thresholds) != sorted(thresholds):
        raise ValueError("threshold grid must be sorted ascending")
    n = len(stats)
    return [(t, Fraction(sum(1 for s in stats if s.pct["C"] < t), n))
            for t in thresholds]


# ---------------------------------------------------------------------------
# Spearman rank correlation

def _average_ranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = (i + j) / 2 + 1  # ranks are 1-based
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def _beta_cf(a: float, b: float, x: float) -> float:
    """Continued fraction for the regularized incomplete beta (Lentz)."""
    max_iter, eps, tiny = 300, 3e-12, 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            break
    return h


def _beta_inc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def student_t_sf2(t: float, dof: int) -> float:
    """Two-sided tail probability of Student's t."""
    if dof < 1:
        raise ValueError("degrees of freedom must be >= 1")
    x = dof / (dof + t * t)
    return _beta_inc(dof / 2.0, 0.5, x)


def spearman(xs: Sequence[float], ys: Sequence[float]) -> CorrelationResult:
    """Spearman rank correlation with average-rank tie handling.

    The p-value is two-sided, from t = rho * sqrt((n-2) / (1-rho^2)) with
    n-2 degrees of freedom. A constant series has no defined rank
    correlation and raises.
    """
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    n = len(xs)
    if n < 3:
        raise ValueError("need at least 3 pairs")
    if len(set(xs)) == 1 or len(set(ys)) == 1:
        raise ValueError("rank correlation undefined for a constant series")
    rx = _average_ranks(xs)
    ry = _average_ranks(ys)
    mx = sum(rx) / n
    my = sum(ry) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    vx = sum((a - mx) ** 2 for a in rx)
    vy = sum((b - my) ** 2 for b in ry)
    rho = cov / math.sqrt(vx * vy)
    rho = max(-1.0, min(1.0, rho))
    if abs(rho) == 1.0:
        p = 0.0
    else:
        t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
        p = student_t_sf2(t, n - 2)
    return CorrelationResult(rho=rho, p_value=p, n=n)


def agreement_accuracy(reference: Sequence[AnnotationLabel],
                       other: Sequence[AnnotationLabel], n: int) -> float:
    """Share of aligned labels that match after coarsening both sides."""
    if len(reference) != len(other):
        raise ValueError(f"length mismatch: {len(reference)} vs {len(other)}")
    if not reference:
        raise ValueError("empty label sequences")
    matches = sum(1 for a, b in zip(reference, other)
                  if coarsen(a, n) == coarsen(b, n))
    return matches / len(reference)


# ---------------------------------------------------------------------------
# shipped audit tables

def _parse_fraction(cell: str) -> Fraction | None:
    return Fraction(cell) if cell else None


def load_audit_table(source: str | Path) -> list[CorpusStats]:
    """Load a per-language audit CSV.

    `source` is a shipped dataset name (ccaligned, paracrawl, wikimatrix,
    oscar, mc4) or a path to a CSV in the same layout:
    lang,c,cc,cs,cb,x,wl,nl,porn,sentences,avg_length.
    """
    if isinstance(source, str) and source in AUDIT_DATASETS:
        text = data_text("audits", f"{source}.csv")
        dataset = source
    else:
        text = Path(source).read_text(encoding="utf-8")
        dataset = Path(source).stem
    rows: list[CorpusStats] = []
    header_seen = False
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if line != "lang,c,cc,cs,cb,x,wl,nl,porn,sentences,avg_length":
                raise ValueError(f"unexpected audit table header: {line}")
            header_seen = True
            continue
        lang, c, cc, cs, cb, x, wl, nl, porn, sentences, avg = line.split(",")
        pct: dict[str, Fraction | None] = {
            "C": _parse_fraction(c), "CC": _parse_fraction(cc),
            "CS": _parse_fraction(cs), "CB": _parse_fraction(cb),
            "X": _parse_fraction(x), "WL": _parse_fraction(wl),
            "NL": _parse_fraction(nl), "offensive": None,
            "porn": _parse_fraction(porn),
        }
        rows.append(CorpusStats(
            dataset=dataset, lang=lang, n_annotated=None, pct=pct,
            avg_length=float(avg) if avg else None,
            corpus_sentences=int(sentences) if sentences else None))
    if not rows:
        raise ValueError(f"no rows in audit table {source}")
    return rows


def sizes_from_stats(stats: Iterable[CorpusStats]) -> dict[str, int | None]:
    return {s.lang: s.corpus_sentences for s in stats}


def load_downstream_scores(path: str | Path) -> dict[str, float]:
    """Externally supplied per-language translation scores (lang,spbleu)."""
    scores: dict[str, float] = {}
    header_seen = False
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if line != "lang,spbleu":
                raise ValueError(f"{path}: header must be lang,spbleu")
            header_seen = True
            continue
        lang, spbleu = line.split(",")
        scores[lang] = float(spbleu)
    if not scores:
        raise ValueError(f"{path}: no scores")
    return scores


def format_pct(value: Fraction | float | None, digits: int = 2) -> str:
    """Boundary rendering of an exact percentage."""
    if value is None:
        return ""
    return f"{float(value):.{digits}f}"
