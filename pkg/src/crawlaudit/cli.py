"""Command-line interface.

Subcommands are thin adapters over the library modules:

    sample      draw a reproducible audit sample from a corpus
    serve       run the local annotation service
    stats       aggregate statistics from annotations or audit tables
    agreement   label accuracy between two annotation files
    codes       lint published language codes
    langid      train / predict / filter / eval the n-gram classifier
    report      full report bundle (statistics plus code lint)

Every command exits 0 on success; failures print a one-line JSON error to
stderr and exit nonzero. Identical inputs and flags produce byte-identical
output files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections import defaultdict
from pathlib import Path

from . import corpus_io, langid, langtags, report, sampling, service, stats
from .taxonomy import MONO, PARALLEL, AnnotationRecord, parse_label

ENV_ROOT = "CRAWLAUDIT_ROOT"


def _fail(message: str, code: int = 1) -> "NoReturn":  # noqa: F821
    print(json.dumps({"error": message}), file=sys.stderr)
    raise SystemExit(code)


# ---------------------------------------------------------------- sample

def cmd_sample(args) -> int:
    if args.parallel:
        if not (args.src_lang and args.tgt_lang):
            _fail("--parallel requires --src-lang and --tgt-lang")
        units = list(corpus_io.read_parallel(args.input, args.src_lang,
                                             args.tgt_lang))
    else:
        if not args.lang:
            _fail("--lang is required for monolingual corpora")
        units = list(corpus_io.read_monolingual(args.input, args.lang))
    sample = sampling.draw_sample(units, total=len(units), n=args.n,
                                  seed=args.seed)
    records = [corpus_io.item_to_record(item, corpus=args.dataset)
               for item in sample.items]
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        n = corpus_io.write_jsonl(records, out)
    finally:
        if args.out:
            out.close()
    print(f"sampled {n} of {len(units)} units (seed {args.seed})",
          file=sys.stderr)
    return 0


# ---------------------------------------------------------------- serve

def cmd_serve(args) -> int:
    root = args.root or os.environ.get(ENV_ROOT)
    if not root:
        _fail(f"--root or ${ENV_ROOT} is required")
    service.serve(root, host=args.host, port=args.port)
    return 0


# ---------------------------------------------------------------- stats

def _records_from_jsonl(path: Path) -> tuple[str, str, list[AnnotationRecord],
                                             dict[str, int], dict[str, str]]:
    """Read one exported annotation file:
    (corpus, lang, records, lengths, per-item langs)."""
    corpus = lang = ""
    records: list[AnnotationRecord] = []
    lengths: dict[str, int] = {}
    langs: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            if "manifest" in row:
                continue
            corpus = row.get("corpus", corpus)
            lang = row.get("lang", lang)
            records.append(AnnotationRecord(
                item_id=row["id"], rater_id=row.get("rater", ""),
                label=parse_label(row["label"]),
                offensive=bool(row.get("offensive", False)),
                porn=bool(row.get("porn", False)),
                note=row.get("note"), timestamp=int(row.get("ts", 0))))
            lengths[row["id"]] = len(row.get("tgt") or row.get("src") or "")
            if row.get("lang"):
                langs[row["id"]] = row["lang"]
    return corpus, lang, records, lengths, langs


def _collect_stats(args) -> dict[str, list[stats.CorpusStats]]:
    per_dataset: dict[str, list[stats.CorpusStats]] = defaultdict(list)
    for name in args.published or []:
        rows = stats.load_audit_table(name)
        per_dataset[name].extend(rows)
    for path in args.audit_table or []:
        rows = stats.load_audit_table(Path(path))
        per_dataset[rows[0].dataset].extend(rows)
    if args.annotations:
        kind = args.kind
        for path in sorted(Path(args.annotations).glob("*.jsonl")):
            corpus, lang, records, lengths, _ = _records_from_jsonl(path)
            if not records:
                continue
            row = stats.per_language_stats(records, kind, dataset=corpus,
                                           lang=lang, lengths=lengths)
            per_dataset[corpus or path.stem].append(row)
    if not per_dataset:
        _fail("no input: pass --published, --audit-table or --annotations")
    return dict(per_dataset)


def _load_sizes(args) -> dict[str, dict[str, int]] | None:
    if not args.sizes:
        return None
    return sampling.read_sizes_csv(args.sizes)


def cmd_stats(args) -> int:
    per_dataset = _collect_stats(args)
    spbleu = stats.load_downstream_scores(args.spbleu) if args.spbleu else None
    bundle = report.build_stats_report(per_dataset, args.out,
                                       sizes=_load_sizes(args), spbleu=spbleu)
    for name in bundle.files:
        print(f"wrote {bundle.out_dir / name}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------- agreement

def _labels_by_item(path: Path) -> dict[str, str]:
    _, _, records, _, _ = _records_from_jsonl(path)
    return {r.item_id: r.label.value for r in records}


def cmd_agreement(args) -> int:
    ref = _labels_by_item(Path(args.ref))
    other = _labels_by_item(Path(args.other))
    if set(ref) != set(other):
        only_ref = sorted(set(ref) - set(other))[:5]
        only_other = sorted(set(other) - set(ref))[:5]
        _fail(f"item ids do not align (only in ref: {only_ref}, "
              f"only in other: {only_other})")
    ids = sorted(ref, key=lambda item_id: (len(item_id), item_id))
    ref_labels = [parse_label(ref[i]) for i in ids]
    other_labels = [parse_label(other[i]) for i in ids]
    acc = stats.agreement_accuracy(ref_labels, other_labels, args.granularity)
    print(f"{acc:.2f}")
    return 0


# ---------------------------------------------------------------- codes

def cmd_codes(args) -> int:
    rules = (langtags.RulesDatabase.load(args.rules) if args.rules
             else langtags.default_rules())
    if args.list:
        codes = [line.strip() for line in
                 Path(args.list).read_text(encoding="utf-8").splitlines()
                 if line.strip() and not line.startswith("#")]
    elif args.code:
        codes = args.code
    else:
        codes = langtags.published_code_list(args.dataset)
    lint = langtags.lint_codes(codes, args.dataset, rules)
    if args.out:
        bundle = report.build_lint_report([lint], args.out)
        for name in bundle.files:
            print(f"wrote {bundle.out_dir / name}", file=sys.stderr)
    print(json.dumps(lint.summary(), sort_keys=True))
    return 0


# ---------------------------------------------------------------- langid

def _parse_corpus_args(specs: list[str]) -> list[tuple[str, list[str]]]:
    out = []
    for spec in specs:
        lang, _, path = spec.partition("=")
        if not path:
            _fail(f"--corpus expects LANG=PATH, got {spec!r}")
        lines = [line for line in
                 Path(path).read_text(encoding="utf-8").splitlines()
                 if line.strip()]
        out.append((lang, lines))
    return out


def cmd_langid_train(args) -> int:
    corpora = _parse_corpus_args(args.corpus)
    model = langid.train(corpora, alpha=args.alpha,
                         orders=tuple(args.orders),
                         min_text_length=args.min_text_length)
    langid.save_model(model, args.out)
    print(f"trained on {len(model.languages)} languages -> {args.out}",
          file=sys.stderr)
    return 0


def cmd_langid_predict(args) -> int:
    model = langid.load_model(args.model)
    texts = [args.text] if args.text else [line.rstrip("\n") for line in sys.stdin]
    for text in texts:
        if not text:
            continue
        pred = langid.predict(model, text)
        print(json.dumps({"lang": pred.lang, "score": round(pred.score, 6),
                          "confident": pred.confident}))
    return 0


def cmd_langid_filter(args) -> int:
    model = langid.load_model(args.model)
    pairs = corpus_io.read_parallel(args.pairs, args.src_lang, args.tgt_lang)
    decisions = langid.filter_corpus(model, pairs, dataset=args.dataset)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("pair_id,src_pred,tgt_pred,kept,evaluable\n")
        for d in decisions:
            fh.write(f"{d.pair_id},{d.src_pred},{d.tgt_pred},"
                     f"{int(d.kept)},{int(d.evaluable)}\n")
    kept = sum(1 for d in decisions if d.kept)
    print(f"kept {kept} of {len(decisions)} pairs", file=sys.stderr)
    return 0


def _metrics_csv_row(name: str, m: "langid.FilterMetrics") -> str:
    cell = lambda v: "" if v is None else f"{v:.4f}"  # noqa: E731
    return ",".join([name, str(m.n_pairs), cell(m.detection_precision),
                     cell(m.detection_recall), cell(m.retention_precision),
                     cell(m.retention_recall)])


def cmd_langid_eval(args) -> int:
    decisions = []
    with open(args.decisions, encoding="utf-8") as fh:
        next(fh)  # header
        for line in fh:
            pair_id, src_pred, tgt_pred, kept, evaluable = line.rstrip("\n").split(",")
            decisions.append(langid.FilterDecision(
                pair_id=pair_id, src_pred=src_pred, src_score=0.0,
                tgt_pred=tgt_pred, tgt_score=0.0, kept=kept == "1",
                evaluable=evaluable == "1"))
    _, _, records, _, langs = _records_from_jsonl(Path(args.annotations))
    annotations = {r.item_id: r for r in records}
    metrics = langid.filter_eval(annotations, decisions,
                                 pair_langs=langs or None)
    if args.out:
        lines = ["language,n_pairs,detection_precision,detection_recall,"
                 "retention_precision,retention_recall",
                 _metrics_csv_row("__all__", metrics)]
        for lang, m in metrics.per_language.items():
            lines.append(_metrics_csv_row(lang, m))
        Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"wrote {args.out}", file=sys.stderr)
    payload = {
        "n_pairs": metrics.n_pairs,
        "detection_precision": metrics.detection_precision,
        "detection_recall": metrics.detection_recall,
        "retention_precision": metrics.retention_precision,
        "retention_recall": metrics.retention_recall,
        "unevaluable": metrics.n_unevaluable,
        "noisy_median_retention_precision":
            metrics.noisy_median_retention_precision,
        "noisy_median_retention_recall": metrics.noisy_median_retention_recall,
    }
    print(json.dumps(payload, sort_keys=True))
    return 0


# ---------------------------------------------------------------- report

def cmd_report(args) -> int:
    per_dataset = _collect_stats(args)
    spbleu = stats.load_downstream_scores(args.spbleu) if args.spbleu else None
    bundle = report.build_stats_report(per_dataset, args.out,
                                       sizes=_load_sizes(args), spbleu=spbleu)
    lint_reports = []
    for dataset in sorted(per_dataset):
        try:
            codes = langtags.published_code_list(dataset)
        except FileNotFoundError:
            continue
        lint_reports.append(langtags.lint_codes(codes, dataset))
    if lint_reports:
        lint_bundle = report.build_lint_report(lint_reports, args.out)
        bundle.files.extend(lint_bundle.files)
    for name in bundle.files:
        print(f"wrote {bundle.out_dir / name}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------- parser

def _add_stats_inputs(p: argparse.ArgumentParser) -> None:
    p.add_argument("--published", action="append", metavar="DATASET",
                   choices=stats.AUDIT_DATASETS,
                   help="use a shipped per-language audit table")
    p.add_argument("--audit-table", action="append", metavar="CSV",
                   help="per-language audit CSV "
                        "(lang,c,cc,cs,cb,x,wl,nl,porn,sentences,avg_length)")
    p.add_argument("--annotations", metavar="DIR",
                   help="directory of exported annotation JSONL files")
    p.add_argument("--kind", choices=(MONO, PARALLEL), default=PARALLEL,
                   help="item kind for --annotations input")
    p.add_argument("--sizes", metavar="CSV",
                   help="sizes CSV with header dataset,lang,sentences")
    p.add_argument("--spbleu", metavar="CSV",
                   help="externally supplied downstream scores (lang,spbleu); "
                        "adds quality-vs-score correlations")
    p.add_argument("--out", required=True, metavar="DIR",
                   help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crawlaudit",
        description="Audit toolkit for web-crawled multilingual corpora.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw a reproducible audit sample")
    p.add_argument("--input", required=True, help="corpus file (.gz accepted)")
    p.add_argument("--lang", help="declared language tag (monolingual)")
    p.add_argument("--parallel", action="store_true",
                   help="input is two-column TSV")
    p.add_argument("--src-lang", help="declared source tag (parallel)")
    p.add_argument("--tgt-lang", help="declared target tag (parallel)")
    p.add_argument("-n", type=int, default=100, help="sample size")
    p.add_argument("--seed", type=int, default=0, help="sampling seed")
    p.add_argument("--dataset", default="", help="corpus name for records")
    p.add_argument("--out", help="output JSONL (default stdout)")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("serve", help="run the local annotation service")
    p.add_argument("--root", help=f"project store directory (or ${ENV_ROOT})")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("stats", help="aggregate audit statistics")
    _add_stats_inputs(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("agreement", help="label accuracy between two raters")
    p.add_argument("--ref", required=True, help="reference annotation JSONL")
    p.add_argument("--other", required=True, help="compared annotation JSONL")
    p.add_argument("-n", "--granularity", type=int, choices=(2, 4, 6),
                   default=6, help="label granularity")
    p.set_defaults(func=cmd_agreement)

    p = sub.add_parser("codes", help="lint published language codes")
    p.add_argument("--dataset", help="dataset name for rule selection")
    p.add_argument("--list", help="file with one code per line")
    p.add_argument("--code", action="append", help="single code (repeatable)")
    p.add_argument("--rules", help="override rules CSV")
    p.add_argument("--out", help="write CSV/Markdown reports here")
    p.set_defaults(func=cmd_codes)

    p = sub.add_parser("langid", help="character n-gram language classifier")
    lsub = p.add_subparsers(dest="langid_command", required=True)

    lp = lsub.add_parser("train", help="train a model")
    lp.add_argument("--corpus", action="append", required=True,
                    metavar="LANG=PATH", help="training text per language")
    lp.add_argument("--alpha", type=float, default=1.0,
                    help="add-alpha smoothing")
    lp.add_argument("--orders", type=int, nargs="+", default=[1, 2, 3, 4],
                    help="n-gram orders")
    lp.add_argument("--min-text-length", type=int, default=20,
                    help="shorter texts are low-confidence")
    lp.add_argument("--out", required=True, help="model file")
    lp.set_defaults(func=cmd_langid_train)

    lp = lsub.add_parser("predict", help="classify text")
    lp.add_argument("--model", required=True)
    lp.add_argument("--text", help="text to classify (default: stdin lines)")
    lp.set_defaults(func=cmd_langid_predict)

    lp = lsub.add_parser("filter", help="filter a parallel corpus")
    lp.add_argument("--model", required=True)
    lp.add_argument("--pairs", required=True, help="two-column TSV")
    lp.add_argument("--src-lang", required=True)
    lp.add_argument("--tgt-lang", required=True)
    lp.add_argument("--dataset", help="dataset name for code corrections")
    lp.add_argument("--out", required=True, help="decisions CSV")
    lp.set_defaults(func=cmd_langid_filter)

    lp = lsub.add_parser("eval", help="score filter decisions against labels")
    lp.add_argument("--decisions", required=True, help="decisions CSV")
    lp.add_argument("--annotations", required=True, help="annotation JSONL")
    lp.add_argument("--out", help="per-language metrics CSV")
    lp.set_defaults(func=cmd_langid_eval)

    p = sub.add_parser("report", help="full report bundle (stats + code lint)")
    _add_stats_inputs(p)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except (ValueError, OSError, service.ProjectError) as e:
        _fail(str(e))
        return 1  # unreachable


if __name__ == "__main__":
    sys.exit(main())
