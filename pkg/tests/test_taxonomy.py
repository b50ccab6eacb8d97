"""Label parsing, coarsening and validation."""

from __future__ import annotations

import itertools

import pytest

from crawlaudit.taxonomy import (MONO, PARALLEL, AnnotationLabel,
                                 AnnotationRecord, C_SUBCLASSES, COARSE_C,
                                 COARSE_NOT_C, coarsen, coarsening_map,
                                 parse_label, render_label, validate_annotation)

RESOLVED = [label for label in AnnotationLabel if label is not AnnotationLabel.U]


class TestParseLabel:
    def test_case_insensitive(self):
        assert parse_label("cc") is AnnotationLabel.CC
        assert parse_label(" wl ") is AnnotationLabel.WL

    def test_aggregate_c_is_not_assignable(self):
        with pytest.raises(ValueError, match="unknown annotation label"):
            parse_label("C")

    def test_nl(self):
        assert parse_label("NL") is AnnotationLabel.NL

    def test_error_lists_valid_tokens(self):
        with pytest.raises(ValueError, match="CC, CS, CB, X, WL, NL, U"):
            parse_label("bogus")

    def test_roundtrip_over_enum(self):
        for label in AnnotationLabel:
            assert parse_label(render_label(label)) is label


class TestCoarsen:
    def test_cs_merges_into_c_at_four(self):
        assert coarsen(AnnotationLabel.CS, 4) == COARSE_C

    def test_x_is_not_c_at_two(self):
        assert coarsen(AnnotationLabel.X, 2) == COARSE_NOT_C

    def test_identity_at_six(self):
        assert coarsen(AnnotationLabel.CC, 6) == "CC"

    def test_u_rejected(self):
        with pytest.raises(ValueError, match="unresolved"):
            coarsen(AnnotationLabel.U, 4)

    def test_bad_granularity(self):
        with pytest.raises(ValueError):
            coarsen(AnnotationLabel.CC, 3)

    def test_four_class_map(self):
        got = {label: coarsen(label, 4) for label in RESOLVED}
        assert got == {AnnotationLabel.CC: "C", AnnotationLabel.CS: "C",
                       AnnotationLabel.CB: "C", AnnotationLabel.X: "X",
                       AnnotationLabel.WL: "WL", AnnotationLabel.NL: "NL"}

    def test_two_class_map(self):
        for label in RESOLVED:
            want = COARSE_C if label in C_SUBCLASSES else COARSE_NOT_C
            assert coarsen(label, 2) == want

    def test_coarsening_is_monotone(self):
        # labels equal at a fine granularity stay equal at coarser ones
        for a, b in itertools.product(RESOLVED, repeat=2):
            if coarsen(a, 6) == coarsen(b, 6):
                assert coarsen(a, 4) == coarsen(b, 4)
            if coarsen(a, 4) == coarsen(b, 4):
                assert coarsen(a, 2) == coarsen(b, 2)

    def test_map_covers_all_resolved_labels(self):
        for n in (2, 4, 6):
            assert set(coarsening_map(n)) == set(RESOLVED)


class TestValidateAnnotation:
    def rec(self, label, **kw):
        defaults = dict(item_id="i1", rater_id="r1", label=label)
        defaults.update(kw)
        return AnnotationRecord(**defaults)

    def test_x_illegal_for_monolingual(self):
        violations = validate_annotation(self.rec(AnnotationLabel.X), MONO)
        assert any("X" in v for v in violations)
        assert validate_annotation(self.rec(AnnotationLabel.X), PARALLEL) == []

    def test_flags_are_orthogonal(self):
        record = self.rec(AnnotationLabel.CC, porn=True)
        assert validate_annotation(record, PARALLEL) == []

    def test_unresolved_u_at_export(self):
        record = self.rec(AnnotationLabel.U)
        assert validate_annotation(record, MONO) == []
        violations = validate_annotation(record, MONO, at_export=True)
        assert any("unresolved U" in v for v in violations)

    def test_registry_checks(self):
        record = self.rec(AnnotationLabel.CC)
        violations = validate_annotation(record, MONO, known_items=["other"],
                                         known_raters=["r2"])
        assert len(violations) == 2

    def test_bad_kind(self):
        with pytest.raises(ValueError):
            validate_annotation(self.rec(AnnotationLabel.CC), "bilingual")
