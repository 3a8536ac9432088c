"""Command-line interface.

    wordgraph analyze BOOK.txt
    wordgraph corpus manifest.csv --out results/
    wordgraph fit results/profiles.csv --out results/
    wordgraph recommend BOOK.txt --stats results/

Exit codes: 0 success, 1 usage/configuration error, 2 data error,
3 corpus finished but some documents failed.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from wordgraph import reports
from wordgraph.errors import ConfigError, DataError, DocumentSkipped
from wordgraph.graphcore import ATTRIBUTES, AttributeVector
from wordgraph.pipeline import (
    WindowingConfig,
    analyze_document,
    default_workers,
    load_manifest,
    run_corpus,
)
from wordgraph.stats import (
    ALPHA,
    CorrelationResult,
    attribute_sd,
    correlate_corpus,
    fit_corpus,
    per_year_means,
    spearman_permutation_pvalue,
    suggest_grade,
)
from wordgraph.textprep import CleanRules, prepare, read_document

log = logging.getLogger("wordgraph")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_PARTIAL = 0, 1, 2, 3
_POLICIES = {"single": "single-window", "skip": "skip"}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _global_options(defaults: bool) -> argparse.ArgumentParser:
    # The same flags are accepted before and after the subcommand; only the
    # top-level copy carries defaults so a subcommand never overwrites them.
    d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--window", type=int, default=d(30), help="window length in tokens (default 30)")
    g.add_argument("--step", type=int, default=d(15), help="window step in tokens (default 15)")
    g.add_argument("--short-text", choices=sorted(_POLICIES), default=d("single"),
                   help="texts shorter than one window: analyze as one window or skip")
    g.add_argument("--rules", type=Path, default=d(None), help="cleaning rules file (action<TAB>pattern)")
    g.add_argument("--out", type=Path, default=d(Path(".")), help="output directory (default .)")
    g.add_argument("--format", choices=("csv", "json"), default=d("csv"), dest="fmt")
    g.add_argument("--seed", type=int, default=d(0), help="seed for randomized statistics")
    g.add_argument("--workers", type=int, default=d(None), help="corpus worker processes")
    g.add_argument("-v", "--verbose", action="count", default=d(0))
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="wordgraph",
        description="Word-recurrence graph connectedness of texts across grade levels.",
        parents=[_global_options(True)],
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = [_global_options(False)]

    p = sub.add_parser("analyze", parents=common, help="profile one text file")
    p.add_argument("file", type=Path)

    p = sub.add_parser("corpus", parents=common, help="profile every text of a manifest")
    p.add_argument("manifest", type=Path)

    p = sub.add_parser("fit", parents=common, help="correlations and saturation fits from profiles")
    p.add_argument("profiles", type=Path)
    p.add_argument("--permutations", type=int, default=0,
                   help="use a seeded permutation test with this many shuffles instead of the t approximation")

    p = sub.add_parser("recommend", parents=common, help="suggest a grade for one text")
    p.add_argument("file", type=Path)
    p.add_argument("--stats", type=Path, required=True,
                   help="directory holding year_means.csv + attribute_sd.csv, or fits.csv")
    return parser


def _config(args: argparse.Namespace) -> WindowingConfig:
    return WindowingConfig(args.window, args.step, _POLICIES[args.short_text])  # type: ignore[arg-type]


def _rules(args: argparse.Namespace) -> CleanRules:
    return CleanRules.from_file(args.rules) if args.rules else CleanRules.default()


def _profile_file(path: Path, args: argparse.Namespace):
    try:
        raw = read_document(path)
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read {path}: {getattr(exc, 'strerror', None) or exc}") from None
    stream = prepare(raw, path.stem, _rules(args))
    if not len(stream):
        raise DataError(f"{path}: no tokens")
    try:
        return analyze_document(stream, _config(args))
    except DocumentSkipped as exc:
        raise DataError(str(exc)) from None


def cmd_analyze(args: argparse.Namespace) -> int:
    profile = _profile_file(args.file, args)
    sys.stdout.write(reports.render_analysis(profile, args.fmt))
    return EXIT_OK


def cmd_corpus(args: argparse.Namespace) -> int:
    cfg, rules = _config(args), _rules(args)
    entries = load_manifest(args.manifest)
    workers = args.workers or default_workers()
    result = run_corpus(entries, cfg, rules, workers=workers)
    ext = args.fmt
    reports.write_text(args.out / f"profiles.{ext}", reports.render_profiles(result.records, ext))
    reports.write_text(args.out / f"skips.{ext}", reports.render_skips(result.skips, ext))
    print(f"{len(result.records)} profiled, {len(result.skips)} skipped -> {args.out}", file=sys.stderr)
    for e in result.errors:
        print(f"error: {e.doc_id}: {e.detail}", file=sys.stderr)
    return EXIT_PARTIAL if result.errors else EXIT_OK


def cmd_fit(args: argparse.Namespace) -> int:
    records = reports.read_profiles(args.profiles)
    if len({r.grade for r in records}) < 2:
        raise DataError("need ≥ 2 distinct grades")
    correlations = correlate_corpus(records)
    if args.permutations > 0:
        grades = [float(r.grade) for r in records]
        permuted = []
        for c in correlations:
            values = [getattr(r.profile.mean, c.attribute) for r in records]
            if c.degenerate:
                permuted.append(c)
                continue
            p = spearman_permutation_pvalue(grades, values, args.permutations, args.seed)
            permuted.append(CorrelationResult(c.attribute, c.rho, p, c.n, p < ALPHA))
        correlations = permuted
    fits = fit_corpus(records)
    rows = [reports.FitRow.combine(c, f) for c, f in zip(correlations, fits)]
    years = per_year_means(records)
    out, ext = args.out, args.fmt
    reports.write_text(out / f"fits.{ext}", reports.render_fits(rows, ext))
    reports.write_text(out / "curves.csv", reports.render_curves(rows, years))
    reports.write_text(out / "year_means.csv", reports.render_year_means(years))
    reports.write_text(out / "attribute_sd.csv", reports.render_sd(attribute_sd(records)))

    def rounded(x: float, digits: int) -> str:
        text = f"{x:.{digits}f}"
        return text[1:] if text.lstrip("-0.") == "" and text.startswith("-") else text

    print(f"{'':<14}" + "".join(f"{a:>9}" for a in ATTRIBUTES))
    table = [
        ("Spearman rho", [rounded(r.rho, 2) for r in rows]),
        ("p-value", [("<0.001" if r.p_value < 0.001 else f"{r.p_value:.3f}") for r in rows]),
        ("R^2", [f"{r.r_squared:.2f}" for r in rows]),
        ("MSE", [f"{r.mse:.2f}" for r in rows]),
        ("tau", ["-" if r.T_rounded is None else str(r.T_rounded) for r in rows]),
        ("f0", [rounded(r.f0, 0) for r in rows]),
        ("f_inf", [rounded(r.f_inf, 0) for r in rows]),
    ]
    for label, cells in table:
        print(f"{label:<14}" + "".join(f"{c:>9}" for c in cells))
    return EXIT_OK


def _load_stats(directory: Path) -> tuple[dict[int, AttributeVector], dict[str, float], str]:
    means_path, sd_path = directory / "year_means.csv", directory / "attribute_sd.csv"
    if means_path.exists() and sd_path.exists():
        table = reports.read_year_means(means_path)
        return {g: y.mean for g, y in table.items()}, reports.read_sd(sd_path), "year means"
    for name in ("fits.csv", "fits.json"):
        if (directory / name).exists():
            rows = reports.read_fits(directory / name)
            by_attr = {r.attribute: r for r in rows}
            if set(by_attr) != set(ATTRIBUTES):
                raise DataError(f"{directory / name}: expected one row per attribute")
            means = {
                g: AttributeVector.from_sequence([float(by_attr[a].predict(g)) for a in ATTRIBUTES])
                for g in range(12)
            }
            # residual spread of the fitted curve stands in for the corpus spread
            sd = {a: by_attr[a].mse ** 0.5 for a in ATTRIBUTES}
            return means, sd, "fitted curves"
    raise DataError(f"{directory}: no year_means.csv/attribute_sd.csv or fits file found")


def cmd_recommend(args: argparse.Namespace) -> int:
    profile = _profile_file(args.file, args)
    means, sd, source = _load_stats(args.stats)
    rec = suggest_grade(profile.mean, means, sd)
    print(f"grade\t{rec.grade}")
    print(f"# statistics: {source}; {len(rec.distances)} grades considered", file=sys.stderr)
    chosen = means[rec.grade].as_dict()
    values = profile.mean.as_dict()
    print("attribute\tvalue\tgrade_mean\tz")
    for a in ATTRIBUTES:
        z = rec.z_scores.get(a)
        print(f"{a}\t{reports.fmt(values[a])}\t{reports.fmt(chosen[a])}\t{'' if z is None else reports.fmt(z)}")
    print("grade\tdistance")
    for g, d in sorted(rec.distances.items()):
        print(f"{g}\t{reports.fmt(d)}")
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "corpus": cmd_corpus, "fit": cmd_fit, "recommend": cmd_recommend}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose > 1 else logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"wordgraph: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"wordgraph: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"wordgraph: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
