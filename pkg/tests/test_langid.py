"""Classifier training, prediction, filtering and its evaluation."""

from __future__ import annotations

import json
import random

import pytest

from crawlaudit.corpus_io import SentencePair
from crawlaudit.langid import (FilterDecision, filter_corpus, filter_eval,
                               load_model, predict, resolve_declared,
                               save_model, train)
from crawlaudit.taxonomy import AnnotationLabel, AnnotationRecord

L = AnnotationLabel


def split_corpora(langid_corpora, train_n=120):
    train_set = {lang: lines[:train_n] for lang, lines in langid_corpora.items()}
    held = {lang: lines[train_n:] for lang, lines in langid_corpora.items()}
    return train_set, held


def ann(item_id, label):
    return AnnotationRecord(item_id=item_id, rater_id="r", label=label)


def dec(item_id, kept, evaluable=True):
    return FilterDecision(pair_id=item_id, src_pred="en", src_score=-1.0,
                          tgt_pred="de", tgt_score=-1.0, kept=kept,
                          evaluable=evaluable)


class TestTrain:
    def test_deterministic_serialization(self, tmp_path, langid_corpora):
        train_set, _ = split_corpora(langid_corpora)
        for name in ("a.json", "b.json"):
            save_model(train(train_set), tmp_path / name)
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_single_language_rejected(self, langid_corpora):
        with pytest.raises(ValueError, match="at least 2"):
            train({"en": langid_corpora["en"]})

    def test_insufficient_text_rejected(self):
        with pytest.raises(ValueError, match="not enough training text"):
            train({"aa": ["short"], "bb": ["also short"]})

    def test_duplicate_language_keys_rejected(self, langid_corpora):
        pairs = [("en", langid_corpora["en"]), ("en", langid_corpora["en"])]
        with pytest.raises(ValueError, match="duplicate"):
            train(pairs)

    def test_model_lists_its_languages(self, langid_corpora):
        train_set, _ = split_corpora(langid_corpora)
        model = train(train_set)
        assert model.languages == tuple(sorted(train_set))


class TestPredict:
    def test_script_disjoint_pair_is_nearly_perfect(self, langid_corpora):
        train_set, held = split_corpora(langid_corpora)
        model = train({"en": train_set["en"], "el": train_set["el"]})
        total = correct = 0
        for lang in ("en", "el"):
            for line in held[lang]:
                total += 1
                correct += predict(model, line).lang == lang
        assert correct / total >= 0.99

    def test_english_sentence(self, langid_corpora):
        train_set, _ = split_corpora(langid_corpora)
        model = train({"en": train_set["en"], "el": train_set["el"]})
        pred = predict(model, "the quick brown fox jumps over the lazy dog")
        assert pred.lang == "en" and pred.confident

    def test_short_text_is_low_confidence(self, langid_corpora):
        train_set, _ = split_corpora(langid_corpora)
        model = train(train_set, min_text_length=20)
        assert predict(model, "abc").confident is False

    def test_empty_text_rejected(self, langid_corpora):
        train_set, _ = split_corpora(langid_corpora)
        model = train(train_set)
        with pytest.raises(ValueError):
            predict(model, "")

    def test_closed_world_returns_supported_language(self, langid_corpora):
        train_set, _ = split_corpora(langid_corpora)
        model = train({"en": train_set["en"], "el": train_set["el"]})
        pred = predict(model, "hyvin meidän vuosi kanssa sitten aikana")
        assert pred.lang in model.languages

    def test_invariant_to_trailing_whitespace(self, langid_corpora):
        train_set, _ = split_corpora(langid_corpora)
        model = train(train_set)
        text = "the quick brown fox jumps over the lazy dog"
        a = predict(model, text)
        b = predict(model, text + "   \n")
        assert (a.lang, a.score) == (b.lang, b.score)


class TestSerialization:
    def test_roundtrip_is_exact(self, tmp_path, langid_corpora):
        train_set, held = split_corpora(langid_corpora)
        model = train(train_set)
        save_model(model, tmp_path / "m.json")
        again = load_model(tmp_path / "m.json")
        assert again.counts == model.counts
        assert again.languages == model.languages
        for line in held["fr"][:10]:
            assert predict(again, line) == predict(model, line)

    def test_version_checked(self, tmp_path):
        (tmp_path / "m.json").write_text(json.dumps({"format_version": 99}))
        with pytest.raises(ValueError, match="format"):
            load_model(tmp_path / "m.json")


class TestResolveDeclared:
    def test_plain_region_tag(self):
        assert resolve_declared("de_DE") == "de"

    def test_code_corrections_applied(self):
        assert resolve_declared("zz_TR", "ccaligned") == "zza"
        assert resolve_declared("iw", "mc4") == "he"

    def test_unparseable_is_none(self):
        assert resolve_declared("simple") is None


@pytest.fixture(scope="module")
def model(langid_corpora):
    train_set, _ = split_corpora(langid_corpora)
    return train({"en": train_set["en"], "de": train_set["de"],
                  "fr": train_set["fr"]})


class TestFilterCorpus:

    def pair(self, i, src, tgt, src_lang="en", tgt_lang="de_DE"):
        return SentencePair(id=str(i), src_lang=src_lang, tgt_lang=tgt_lang,
                            src_text=src, tgt_text=tgt)

    def test_kept_iff_both_sides_match(self, model, langid_corpora):
        _, held = split_corpora(langid_corpora)
        en, de, fr = held["en"], held["de"], held["fr"]
        pairs = [
            self.pair(0, en[0], de[0]),   # both declared languages: keep
            self.pair(1, en[1], en[2]),   # target is english: drop
            self.pair(2, fr[0], de[1]),   # source is french: drop
            self.pair(3, en[3], de[2]),   # keep
        ]
        decisions = filter_corpus(model, pairs)
        assert [d.kept for d in decisions] == [True, False, False, True]
        assert decisions[1].tgt_pred == "en"

    def test_low_confidence_counts_as_mismatch(self, model, langid_corpora):
        _, held = split_corpora(langid_corpora)
        pairs = [self.pair(0, "ok", held["de"][0])]
        decisions = filter_corpus(model, pairs)
        assert decisions[0].kept is False

    def test_unsupported_declared_language_is_unevaluable(self, model,
                                                          langid_corpora):
        _, held = split_corpora(langid_corpora)
        pairs = [self.pair(0, held["en"][0], held["de"][0], tgt_lang="zz_TR")]
        decisions = filter_corpus(model, pairs, dataset="ccaligned")
        assert decisions[0].evaluable is False and decisions[0].kept is False

    def test_kept_set_is_cleaner_than_the_corpus(self, model, langid_corpora):
        # precision-up trade-off: with a better-than-chance classifier the
        # kept pairs contain a higher share of correct pairs than the corpus
        _, held = split_corpora(langid_corpora)
        en, de, fr = held["en"], held["de"], held["fr"]
        pairs, annotations = [], {}
        for i in range(100):
            if i % 5 < 3:  # 60% correct pairs
                pairs.append(self.pair(i, en[i % len(en)], de[i % len(de)]))
                label = L.CC
            else:  # 40% wrong-language targets
                pairs.append(self.pair(i, en[i % len(en)], fr[i % len(fr)]))
                label = L.WL
            annotations[str(i)] = AnnotationRecord(item_id=str(i),
                                                   rater_id="r", label=label)
        decisions = filter_corpus(model, pairs)
        metrics = filter_eval(annotations, decisions)
        corpus_c = 0.6
        assert metrics.retention_precision is not None
        assert metrics.retention_precision >= corpus_c
        assert metrics.retention_recall is not None

    def test_hundred_pair_plant_corpus(self, model, langid_corpora):
        _, held = split_corpora(langid_corpora)
        en, de, fr = held["en"], held["de"], held["fr"]
        rng = random.Random(5)
        pairs, expected = [], []
        for i in range(100):
            roll = rng.random()
            if roll < 0.5:
                pairs.append(self.pair(i, en[i % len(en)], de[i % len(de)]))
                expected.append(True)
            elif roll < 0.75:
                pairs.append(self.pair(i, en[i % len(en)], fr[i % len(fr)]))
                expected.append(False)
            else:
                pairs.append(self.pair(i, de[i % len(de)], de[(i + 1) % len(de)]))
                expected.append(False)
        decisions = filter_corpus(model, pairs)
        assert [d.kept for d in decisions] == expected


def brute_force_metrics(annotations, decisions):
    """Independent oracle: recount the confusion matrix from scratch."""
    rows = [(d.kept, annotations[d.pair_id].label) for d in decisions
            if d.evaluable and annotations[d.pair_id].label is not L.U]
    pos = {L.CC, L.CS, L.CB, L.X}
    cor = {L.CC, L.CS, L.CB}
    tp = sum(1 for kept, lab in rows if kept and lab in pos)
    fp = sum(1 for kept, lab in rows if kept and lab not in pos)
    fn = sum(1 for kept, lab in rows if not kept and lab in pos)
    kept_c = sum(1 for kept, lab in rows if kept and lab in cor)
    kept_n = sum(1 for kept, _ in rows if kept)
    all_c = sum(1 for _, lab in rows if lab in cor)
    div = lambda a, b: None if b == 0 else a / b  # noqa: E731
    return (div(tp, tp + fp), div(tp, tp + fn),
            div(kept_c, kept_n), div(kept_c, all_c))


class TestFilterEval:
    def test_all_kept_all_correct(self):
        annotations = {str(i): ann(str(i), L.CC) for i in range(5)}
        decisions = [dec(str(i), kept=True) for i in range(5)]
        m = filter_eval(annotations, decisions)
        assert m.retention_precision == 1.0 and m.retention_recall == 1.0

    def test_four_pair_confusion_matrix(self):
        annotations = {"a": ann("a", L.CC), "b": ann("b", L.WL),
                       "c": ann("c", L.CS), "d": ann("d", L.NL)}
        decisions = [dec("a", True), dec("b", True),
                     dec("c", False), dec("d", False)]
        m = filter_eval(annotations, decisions)
        assert m.retention_precision == 0.5
        assert m.retention_recall == 0.5
        assert m.detection_precision == 0.5
        assert m.detection_recall == 0.5

    def test_nothing_kept(self):
        annotations = {"a": ann("a", L.CC), "b": ann("b", L.NL)}
        decisions = [dec("a", False), dec("b", False)]
        m = filter_eval(annotations, decisions)
        assert m.retention_recall == 0.0
        assert m.retention_precision is None
        assert m.detection_precision is None

    def test_missing_annotation_rejected(self):
        with pytest.raises(ValueError, match="unannotated"):
            filter_eval({}, [dec("a", True)])

    def test_unevaluable_decisions_are_skipped(self):
        annotations = {"a": ann("a", L.CC)}
        decisions = [dec("a", True), dec("zzz", False, evaluable=False)]
        m = filter_eval(annotations, decisions)
        assert m.n_pairs == 1 and m.n_unevaluable == 1

    def test_matches_brute_force_oracle_on_random_instances(self):
        rng = random.Random(20260808)
        labels = [L.CC, L.CS, L.CB, L.X, L.WL, L.NL]
        for _ in range(100):
            n = rng.randint(1, 1000)
            annotations, decisions = {}, []
            for i in range(n):
                item_id = f"p{i}"
                annotations[item_id] = ann(item_id, rng.choice(labels))
                decisions.append(dec(item_id, kept=rng.random() < 0.5,
                                     evaluable=rng.random() < 0.95))
            m = filter_eval(annotations, decisions)
            want = brute_force_metrics(annotations, decisions)
            got = (m.detection_precision, m.detection_recall,
                   m.retention_precision, m.retention_recall)
            assert got == want

    def test_per_language_and_noisy_median(self):
        annotations, decisions, langs = {}, [], {}
        # lang "good": 4 of 4 correct; lang "bad": 1 of 4 correct
        for i, (lang, label, kept) in enumerate([
                ("good", L.CC, True), ("good", L.CC, True),
                ("good", L.CB, True), ("good", L.CS, False),
                ("bad", L.CC, True), ("bad", L.NL, True),
                ("bad", L.WL, False), ("bad", L.NL, False)]):
            item_id = f"i{i}"
            annotations[item_id] = ann(item_id, label)
            decisions.append(dec(item_id, kept))
            langs[item_id] = lang
        m = filter_eval(annotations, decisions, pair_langs=langs)
        assert set(m.per_language) == {"good", "bad"}
        assert m.per_language["bad"].retention_precision == 0.5
        # only "bad" is under 50% correct, so the noisy median is its value
        assert m.noisy_median_retention_precision == 0.5
