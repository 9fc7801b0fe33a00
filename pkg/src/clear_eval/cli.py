"""Command-line entry point: ``clear-eval <command> ...``.

Exit codes: 0 success, 1 validation or domain error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

import yaml

from . import analysis, ingestion, report, simgen, stats
from .model import ClearError, Dataset, validate_dataset
from .reliability import DEFAULT_SEMANTICS, SEMANTICS

log = logging.getLogger("clear_eval")

EXIT_OK, EXIT_DOMAIN, EXIT_IO = 0, 1, 2


class Findings(Exception):
    """Validation found problems; already reported."""


def _use_color() -> bool:
    return sys.stdout.isatty() and not os.environ.get("CLEAR_NO_COLOR")


def _style(text: str, code: str) -> str:
    return f"\x1b[{code}m{text}\x1b[0m" if _use_color() else text


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError("k values must be positive integers")
    return values


def _str_list(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def _load_checked(args: argparse.Namespace) -> Dataset:
    """Load runs + suite (+ pricing, weights) and stop on any validation finding."""
    dataset, line_errors = ingestion.load_dataset(
        args.runs, args.suite, getattr(args, "pricing", None), getattr(args, "weights_file", None)
    )
    violations = validate_dataset(dataset.records, dataset.suite)
    if line_errors or violations:
        for path, err in line_errors:
            print(f"{path}: {err}")
        for v in violations:
            print(v)
        print(f"{len(line_errors) + len(violations)} violations")
        raise Findings
    return dataset


def cmd_validate(args: argparse.Namespace) -> int:
    _load_checked(args)
    print("0 violations")
    return EXIT_OK


def _summaries(args: argparse.Namespace, dataset: Dataset) -> tuple[list, str]:
    weights = dataset.weights
    name = args.weights
    if name not in weights:
        raise ClearError(f"unknown weight profile {name!r}; available: {', '.join(sorted(weights))}")
    ks = args.k
    rk = args.reliability_k or (8 if 8 in ks else max(ks))
    tasks = ingestion.load_task_list(args.reliability_tasks) if args.reliability_tasks else None
    summaries = analysis.summarize(dataset, weights[name], ks, args.passk_semantics, tasks, rk)
    return summaries, name


def _correlation(summaries, ratings_path, weights, bootstrap: int, seed: int, approaches=None):
    ratings = ingestion.load_ratings(ratings_path)
    expert = stats.mean_rating_by_agent(ratings)
    scores = analysis.approach_scores(summaries, weights)
    results = stats.correlate_approaches(
        scores, expert, approaches or ("efficacy", "efficacy_cost", "clear"), bootstrap, seed
    )
    try:
        alpha = stats.krippendorff_alpha(ratings)
    except ClearError:
        alpha = None
    return results, alpha


def cmd_evaluate(args: argparse.Namespace) -> int:
    dataset = _load_checked(args)
    summaries, weights_name = _summaries(args, dataset)
    pareto = analysis.pareto_frontier(summaries, args.dims)
    breakdown = analysis.domain_breakdown(dataset.records, dataset.suite)
    cost_rows = report.cost_latency_rows(dataset.records, dataset.pricing)
    correlation = alpha = None
    if args.ratings:
        correlation, alpha = _correlation(
            summaries, args.ratings, dataset.weights[weights_name], args.bootstrap, args.seed
        )
    reference = args.reference_frontier
    written = report.write_reports(
        args.out, summaries, pareto, breakdown, cost_rows, correlation, reference, weights_name, alpha
    )
    print(report.render_summary_table(summaries, pareto, args.format, False, reference), end="")
    print()
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_pareto(args: argparse.Namespace) -> int:
    if args.summary:
        summaries = report.read_summary_csv(args.summary)
    else:
        if not args.suite:
            raise ClearError("--runs needs --suite")
        args.weights, args.weights_file = "equal", None
        summaries, _ = _summaries(args, _load_checked(args))
    result = analysis.pareto_frontier(summaries, args.dims)
    dims = ", ".join(f"{d} ({'min' if s == 'minimize' else 'max'})" for d, s in result.dimensions)
    print(f"dimensions: {dims}")
    print(f"frontier: {', '.join(result.frontier)}")
    for agent, entry in result.entries.items():
        if entry.on_frontier:
            print(f"  {_style(agent, '32')}: on frontier")
        else:
            print(f"  {agent}: dominated by {', '.join(entry.dominated_by)}")
    if args.reference_frontier is not None:
        missing, extra = result.divergence(args.reference_frontier)
        if missing or extra:
            print(f"differs from reference: missing {missing or '[]'}, extra {extra or '[]'}")
        else:
            print("matches reference")
    return EXIT_OK


def cmd_correlate(args: argparse.Namespace) -> int:
    summaries = report.read_summary_csv(args.summary)
    weights = ingestion.load_weights(args.weights_file)
    if args.weights not in weights:
        raise ClearError(f"unknown weight profile {args.weights!r}")
    results, alpha = _correlation(
        summaries, args.ratings, weights[args.weights], args.bootstrap, args.seed, args.approaches
    )
    print(report.render_correlation_table(results, args.format), end="")
    if alpha is not None:
        print(f"\ninter-rater agreement (Krippendorff's alpha, ordinal): {report.fmt_num(alpha, 3)}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "correlation.csv"
    path.write_text(report.render_correlation_table(results, "csv"), encoding="utf-8", newline="\n")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    profiles = simgen.load_profiles(args.profiles)
    suite, _ = ingestion.load_suite(args.suite)
    records = simgen.generate(profiles, suite, args.trials, args.seed)
    ingestion.dump_runs(args.out, records)
    print(f"wrote {len(records)} records to {args.out} (seed {args.seed}, {args.trials} trials/task)")
    print("ground truth:")
    for p in profiles:
        pas = 1 - p.violation_rate
        inj = 1 - p.attack_success_rate
        print(f"  {p.agent_id}: success_rate={p.success_rate:g} pas~{pas:g} injection_resistance~{inj:g}")
    return EXIT_OK


def cmd_fixture(args: argparse.Namespace) -> int:
    build = {"table1": simgen.table1_fixture, "domains": simgen.domain_fixture, "sla": simgen.sla_fixture}
    dataset = build[args.name]()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ingestion.dump_runs(out / "runs.jsonl", dataset.records)
    ingestion.dump_suite(out / "suite.yaml", dataset.suite, dataset.profiles)
    with open(out / "pricing.yaml", "w", encoding="utf-8") as fh:
        yaml.safe_dump(ingestion.pricing_to_tree(dataset.pricing), fh, sort_keys=False)
    if args.name == "table1":
        with open(out / "profiles.yaml", "w", encoding="utf-8") as fh:
            yaml.safe_dump(simgen.profiles_to_tree(simgen.table1_like_profiles()), fh, sort_keys=False)
    print(f"wrote {args.name} fixture ({len(dataset.records)} records) to {out}")
    return EXIT_OK


def _add_dataset_args(p: argparse.ArgumentParser, suite_required: bool = True) -> None:
    p.add_argument("--runs", nargs="+", required=suite_required, help="run log(s), newline-delimited JSON")
    p.add_argument("--suite", required=suite_required, help="suite manifest (YAML)")


def _add_summary_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--pricing", help="pricing table (YAML); needed when runs lack cost_usd")
    p.add_argument("--reliability-tasks", help="file listing task ids for pass@k, one per line")
    p.add_argument("--passk-semantics", choices=SEMANTICS, default=DEFAULT_SEMANTICS)
    p.add_argument("--k", type=_int_list, default=[1, 3, 5, 8], help="pass@k values (default 1,3,5,8)")
    p.add_argument("--reliability-k", type=int, help="k used as the reliability dimension (default 8)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clear-eval", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check run logs against the suite")
    _add_dataset_args(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("evaluate", help="compute all metrics and write reports")
    _add_dataset_args(p)
    _add_summary_args(p)
    p.add_argument("--weights", default="equal", help="weight profile name (default equal)")
    p.add_argument("--weights-file", help="YAML file of named weight profiles (default: bundled presets)")
    p.add_argument("--dims", type=_str_list, default=list(analysis.DEFAULT_PARETO_DIMS))
    p.add_argument("--reference-frontier", type=_str_list, help="expected frontier to compare against")
    p.add_argument("--ratings", help="expert ratings CSV; adds the correlation table")
    p.add_argument("--bootstrap", type=int, default=0, help="bootstrap resamples for correlation CIs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=report.FORMATS, default="markdown")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("pareto", help="print the Pareto frontier")
    _add_dataset_args(p, suite_required=False)
    _add_summary_args(p)
    p.add_argument("--summary", help="summary.csv written by evaluate")
    p.add_argument("--dims", type=_str_list, default=list(analysis.DEFAULT_PARETO_DIMS),
                   help=f"comma list from {', '.join(analysis.PARETO_DIMENSIONS)}")
    p.add_argument("--reference-frontier", type=_str_list)
    p.set_defaults(func=cmd_pareto)

    p = sub.add_parser(
        "correlate",
        help="correlate evaluation approaches with expert ratings",
        description=(
            "Approaches: efficacy (raw efficacy), efficacy_cost (mean of min-max normalized "
            "efficacy and normalized cost, equal weights), clear (full composite score). "
            "Each is correlated with the per-agent mean expert rating."
        ),
    )
    p.add_argument("--summary", required=True)
    p.add_argument("--ratings", required=True)
    p.add_argument("--approaches", type=_str_list, default=["efficacy", "efficacy_cost", "clear"])
    p.add_argument("--bootstrap", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--weights", default="equal")
    p.add_argument("--weights-file")
    p.add_argument("--format", choices=report.FORMATS, default="markdown")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("simulate", help="write a synthetic run log")
    p.add_argument("--profiles", required=True, help="YAML list of agent profiles")
    p.add_argument("--suite", required=True)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fixture", help="write a constructed reference dataset")
    p.add_argument("name", choices=("table1", "domains", "sla"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fixture)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except Findings:
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ClearError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
