"""Reproducible audit-sample selection.

Randomness comes from SplitMix64, a fixed 64-bit generator, so a
(total, n, seed) triple selects the same line indices on every platform
and in every implementation of the same algorithm. Index selection uses
Floyd's algorithm for uniform sampling without replacement.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64: state advances by the golden-gamma constant, output is
    the finalizer mix of the new state."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Unbiased draw from [0, bound) via rejection sampling."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            r = self.next64()
            if r < limit:
                return r % bound


@dataclass
class AuditSample:
    corpus: object | None
    seed: int
    requested_n: int
    items: list = field(default_factory=list)
    selected_indices: list[int] = field(default_factory=list)


def sample_indices(total: int, n: int, seed: int) -> list[int]:
    """Uniform sample of n distinct indices from range(total), sorted.

    Floyd's algorithm: for i in [total-n, total), draw j in [0, i]; take j
    unless already taken, in which case take i.
    """
    if n < 1:
        raise ValueError("sample size must be at least 1")
    if total < 1:
        raise ValueError("cannot sample from an empty corpus")
    if total <= n:
        return list(range(total))
    rng = SplitMix64(seed)
    chosen: set[int] = set()
    for i in range(total - n, total):
        j = rng.below(i + 1)
        chosen.add(i if j in chosen else j)
    return sorted(chosen)


def draw_sample(stream: Iterable, total: int, n: int, seed: int,
                corpus=None) -> AuditSample:
    """Select a reproducible sample from a corpus stream.

    `total` must equal the number of units the stream yields; positions in
    yield order are the sampled indices. When total <= n the whole corpus
    is selected.
    """
    wanted = sample_indices(total, n, seed)
    wanted_set = set(wanted)
    items = []
    count = 0
    for pos, item in enumerate(stream):
        count += 1
        if pos in wanted_set:
            items.append(item)
    if count != total:
        raise ValueError(f"stream yielded {count} units, expected {total}")
    return AuditSample(corpus=corpus, seed=seed, requested_n=n, items=items,
                       selected_indices=wanted)


def select_languages(sizes: Mapping[str, int], k: int,
                     extra: Sequence[str] = ()) -> list[str]:
    """The k smallest-by-count languages plus `extra`, sorted by count.

    Ties break lexicographically. Languages named in `extra` must exist in
    `sizes`.
    """
    if not sizes:
        raise ValueError("sizes must be non-empty")
    if k < 0:
        raise ValueError("k must be >= 0")
    missing = [lang for lang in extra if lang not in sizes]
    if missing:
        raise ValueError(f"extra languages not in sizes: {', '.join(missing)}")
    ranked = sorted(sizes, key=lambda lang: (sizes[lang], lang))
    picked = dict.fromkeys(ranked[:k])
    for lang in extra:
        picked.setdefault(lang)
    return sorted(picked, key=lambda lang: (sizes[lang], lang))


def read_sizes_csv(path: str | Path) -> dict[str, dict[str, int]]:
    """Load a dataset,lang,sentences CSV (header required)."""
    out: dict[str, dict[str, int]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"dataset", "lang", "sentences"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValueError(f"{path}: header must name columns {sorted(required)}")
        for row in reader:
            out.setdefault(row["dataset"], {})[row["lang"]] = int(row["sentences"])
    return out
