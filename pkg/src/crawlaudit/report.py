"""Report files: per-language stats, aggregates, thresholds, CDF,
correlations and the code-lint report, as CSV plus a Markdown summary.

All percentages are rendered to two decimals; identical inputs produce
byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import langtags, stats

CDF_GRID = tuple(range(0, 102))


@dataclass
class ReportBundle:
    out_dir: Path
    files: list[str] = field(default_factory=list)

    def path(self, name: str) -> Path:
        self.files.append(name)
        return self.out_dir / name


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def per_language_csv(rows: Sequence[stats.CorpusStats]) -> str:
    lines = ["dataset,lang,c,cc,cs,cb,x,wl,nl,porn,sentences,avg_length"]
    for s in rows:
        lines.append(",".join([
            s.dataset, s.lang,
            *(stats.format_pct(s.pct.get(k))
              for k in ("C", "CC", "CS", "CB", "X", "WL", "NL", "porn")),
            "" if s.corpus_sentences is None else str(s.corpus_sentences),
            "" if s.avg_length is None else f"{s.avg_length:.2f}",
        ]))
    return "\n".join(lines) + "\n"


def aggregates_csv(per_dataset: dict[str, tuple[stats.AggregateStats,
                                                stats.AggregateStats]]) -> str:
    keys = ("C", "X", "WL", "NL", "offensive", "porn")
    lines = ["dataset,average," + ",".join(k.lower() for k in keys)]
    for dataset, (macro, micro) in sorted(per_dataset.items()):
        for name, agg in (("macro", macro.macro), ("micro", micro.micro)):
            lines.append(",".join(
                [dataset, name] + [stats.format_pct(agg.get(k)) for k in keys]))
    return "\n".join(lines) + "\n"


def thresholds_csv(per_dataset: dict[str, stats.ThresholdCounts]) -> str:
    lines = ["dataset,langs_zero_c,langs_under50_c,langs_over50_nl,langs_over50_wl"]
    for dataset, t in sorted(per_dataset.items()):
        lines.append(f"{dataset},{t.zero_c},{t.under50_c},{t.over50_nl},{t.over50_wl}")
    return "\n".join(lines) + "\n"


def cdf_csv(per_dataset: dict[str, list[tuple[float, object]]]) -> str:
    lines = ["dataset,threshold,fraction_below"]
    for dataset, points in sorted(per_dataset.items()):
        for threshold, fraction in points:
            lines.append(f"{dataset},{threshold},{float(fraction):.6f}")
    return "\n".join(lines) + "\n"


def correlation_csv(rows: dict[tuple[str, str], stats.CorrelationResult]) -> str:
    lines = ["dataset,variables,rho,p_value,n"]
    for (dataset, variables), r in sorted(rows.items()):
        lines.append(f"{dataset},{variables},{r.rho:.4f},{r.p_value:.6g},{r.n}")
    return "\n".join(lines) + "\n"


def lint_csv(reports: Sequence[langtags.LintReport]) -> str:
    lines = ["dataset,observed,category,suggestions,note"]
    for report in reports:
        for issue in report.issues:
            note = issue.note.replace(",", ";")
            lines.append(",".join([report.dataset, issue.observed,
                                   issue.category, "|".join(issue.suggestions),
                                   note]))
    return "\n".join(lines) + "\n"


def lint_markdown(reports: Sequence[langtags.LintReport]) -> str:
    out = ["# Language-code lint", ""]
    for report in reports:
        s = report.summary()
        out.append(f"## {report.dataset or 'all datasets'}")
        out.append("")
        out.append(f"- codes checked: {s['codes']}")
        out.append(f"- codes flagged: {s['flagged_codes']}")
        out.append(f"- nonstandard or deprecated codes: {s['nonstandard_codes']}")
        for category, count in s["per_category"].items():
            if count:
                out.append(f"- {category}: {count}")
        out.append("")
        for issue in report.issues:
            sugg = f" -> {', '.join(issue.suggestions)}" if issue.suggestions else ""
            out.append(f"- `{issue.observed}` {issue.category}{sugg}: {issue.note}")
        out.append("")
    return "\n".join(out)


def summary_markdown(per_dataset_stats: dict[str, list[stats.CorpusStats]],
                     aggregates: dict[str, tuple[stats.AggregateStats,
                                                 stats.AggregateStats]],
                     thresholds: dict[str, stats.ThresholdCounts],
                     correlations: dict[tuple[str, str],
                                        stats.CorrelationResult]) -> str:
    out = ["# Corpus audit summary", ""]
    out.append("| dataset | languages | macro C | micro C | 0% C | <50% C "
               "| >50% NL | >50% WL | rho(C, size) |")
    out.append("|---|---|---|---|---|---|---|---|---|")
    for dataset in sorted(per_dataset_stats):
        rows = per_dataset_stats[dataset]
        macro, micro = aggregates[dataset]
        t = thresholds[dataset]
        rho = correlations.get((dataset, "c_vs_size"))
        out.append(
            f"| {dataset} | {len(rows)} "
            f"| {stats.format_pct(macro.macro.get('C'))} "
            f"| {stats.format_pct(micro.micro.get('C'))} "
            f"| {t.zero_c} | {t.under50_c} | {t.over50_nl} | {t.over50_wl} "
            f"| {f'{rho.rho:.2f}' if rho else ''} |")
    out.append("")
    for dataset in sorted(aggregates):
        micro = aggregates[dataset][1]
        if micro.excluded:
            out.append(f"- {dataset}: excluded from micro averages and size "
                       f"correlation (unknown size): "
                       f"{', '.join(micro.excluded)}")
    out.append("")
    return "\n".join(out)


def build_stats_report(per_dataset_stats: dict[str, list[stats.CorpusStats]],
                       out_dir: str | Path,
                       sizes: dict[str, dict[str, int | None]] | None = None,
                       spbleu: dict[str, float] | None = None,
                       ) -> ReportBundle:
    """Compute and write the full statistics bundle for several datasets."""
    bundle = ReportBundle(out_dir=Path(out_dir))
    all_rows: list[stats.CorpusStats] = []
    aggregates: dict[str, tuple[stats.AggregateStats, stats.AggregateStats]] = {}
    thresholds: dict[str, stats.ThresholdCounts] = {}
    cdfs: dict[str, list] = {}
    correlations: dict[tuple[str, str], stats.CorrelationResult] = {}

    for dataset, rows in per_dataset_stats.items():
        all_rows.extend(rows)
        dataset_sizes = (sizes or {}).get(dataset) or stats.sizes_from_stats(rows)
        macro = stats.macro_average(rows)
        try:
            micro = stats.micro_average(rows, dataset_sizes)
        except ValueError:
            # no language has a known size; macro-only report
            micro = stats.AggregateStats(micro={},
                                         excluded=tuple(s.lang for s in rows))
        aggregates[dataset] = (macro, micro)
        thresholds[dataset] = stats.threshold_summary(rows)
        cdfs[dataset] = stats.quality_cdf(rows, CDF_GRID)
        sized = [(float(s.pct["C"]), dataset_sizes.get(s.lang)) for s in rows
                 if dataset_sizes.get(s.lang) is not None]
        if len(sized) >= 3:
            correlations[(dataset, "c_vs_size")] = stats.spearman(
                [c for c, _ in sized], [n for _, n in sized])
        if spbleu:
            scored = [(float(s.pct["C"]), spbleu[s.lang],
                       dataset_sizes.get(s.lang))
                      for s in rows if s.lang in spbleu]
            if len(scored) >= 3:
                correlations[(dataset, "c_vs_spbleu")] = stats.spearman(
                    [c for c, _, _ in scored], [b for _, b, _ in scored])
                with_size = [(c * n, b) for c, b, n in scored if n is not None]
                if len(with_size) >= 3:
                    # expected number of good sentences vs downstream score
                    correlations[(dataset, "good_sentences_vs_spbleu")] = \
                        stats.spearman([g for g, _ in with_size],
                                       [b for _, b in with_size])

    _write(bundle.path("per_language.csv"), per_language_csv(all_rows))
    _write(bundle.path("aggregates.csv"), aggregates_csv(aggregates))
    _write(bundle.path("thresholds.csv"), thresholds_csv(thresholds))
    _write(bundle.path("quality_cdf.csv"), cdf_csv(cdfs))
    _write(bundle.path("correlations.csv"), correlation_csv(correlations))
    _write(bundle.path("summary.md"),
           summary_markdown(per_dataset_stats, aggregates, thresholds,
                            correlations))
    return bundle


def build_lint_report(reports: Sequence[langtags.LintReport],
                      out_dir: str | Path) -> ReportBundle:
    bundle = ReportBundle(out_dir=Path(out_dir))
    _write(bundle.path("code_lint.csv"), lint_csv(reports))
    _write(bundle.path("code_lint.md"), lint_markdown(reports))
    summaries = {r.dataset or "all": r.summary() for r in reports}
    _write(bundle.path("code_lint_summary.json"),
           json.dumps(summaries, indent=2, sort_keys=True) + "\n")
    return bundle
