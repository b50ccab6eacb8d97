"""The audit label set, coarsening between granularities, and validation.

Assignable labels: CC (correct natural), CS (correct short), CB (correct
boilerplate), X (incorrect translation; parallel data only), WL (wrong
language), NL (not language), U (unknown, to be resolved before export).
C is the aggregate of CC/CS/CB and is never assigned directly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Mapping


class AnnotationLabel(str, enum.Enum):
    CC = "CC"
    CS = "CS"
    CB = "CB"
    X = "X"
    WL = "WL"
    NL = "NL"
    U = "U"

    def __str__(self) -> str:  # serialize as the bare token
        return self.value


C_SUBCLASSES = frozenset({AnnotationLabel.CC, AnnotationLabel.CS, AnnotationLabel.CB})

#: Aggregate token for the correct classes at coarse granularities.
COARSE_C = "C"
#: Complement token at the binary granularity.
COARSE_NOT_C = "not-C"

GRANULARITIES = (2, 4, 6)

MONO = "mono"
PARALLEL = "parallel"


@dataclass(frozen=True)
class AnnotationRecord:
    """A single rater judgment. Flags are independent of the label."""

    item_id: str
    rater_id: str
    label: AnnotationLabel
    offensive: bool = False
    porn: bool = False
    note: str | None = None
    timestamp: int = 0


def parse_label(token: str) -> AnnotationLabel:
    """Case-insensitive parse of an assignable label token. No aliases."""
    candidate = token.strip().upper()
    try:
        return AnnotationLabel(candidate)
    except ValueError:
        valid = ", ".join(label.value for label in AnnotationLabel)
        raise ValueError(
            f"unknown annotation label {token!r}; valid labels: {valid}"
        ) from None


def render_label(label: AnnotationLabel) -> str:
    return label.value


def coarsening_map(n: int) -> Mapping[AnnotationLabel, str]:
    """The label map at granularity n (U is not mappable)."""
    if n not in GRANULARITIES:
        raise ValueError(f"granularity must be one of {GRANULARITIES}, got {n}")
    out: dict[AnnotationLabel, str] = {}
    for label in AnnotationLabel:
        if label is AnnotationLabel.U:
            continue
        if n == 6:
            out[label] = label.value
        elif n == 4:
            out[label] = COARSE_C if label in C_SUBCLASSES else label.value
        else:
            out[label] = COARSE_C if label in C_SUBCLASSES else COARSE_NOT_C
    return out


def coarsen(label: AnnotationLabel, n: int) -> str:
    """Coarsen a resolved label to granularity n (2, 4 or 6)."""
    if label is AnnotationLabel.U:
        raise ValueError("U is unresolved and cannot be coarsened")
    return coarsening_map(n)[label]


def validate_annotation(record: AnnotationRecord, item_kind: str,
                        known_items: Iterable[str] | None = None,
                        known_raters: Iterable[str] | None = None,
                        at_export: bool = False) -> list[str]:
    """Return human-readable violations; an empty list means valid."""
    violations = []
    if item_kind not in (MONO, PARALLEL):
        raise ValueError(f"item_kind must be '{MONO}' or '{PARALLEL}'")
    if record.label is AnnotationLabel.X and item_kind == MONO:
        violations.append("label X is not legal for monolingual items")
    if record.label is AnnotationLabel.U and at_export:
        violations.append("unresolved U label at export time")
    if not record.rater_id:
        violations.append("empty rater id")
    if known_items is not None and record.item_id not in set(known_items):
        violations.append(f"unknown item id: {record.item_id}")
    if known_raters is not None and record.rater_id not in set(known_raters):
        violations.append(f"unknown rater id: {record.rater_id}")
    return violations
