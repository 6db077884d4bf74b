"""Command-line front end: ``sorec {synth,srs,centrality,sir,evaluate}``.

Exit codes: 0 success, 1 usage error, 2 data or validation error. The
default output directory comes from ``$SOREC_OUTPUT_DIR`` (else the current
directory); ``--output-dir`` overrides it.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .centrality import MEASURES, SoRecConfig, compute_scores, compute_sorec, rank_nodes
from .centrality import scores_bundle_json, write_scores_csv
from .evaluation import evaluate_pipeline, evaluate_sweep, write_report
from .relations import spheres_to_json, write_srs_csv
from .sir import SIRConfig, monte_carlo_influence, write_outcomes_csv
from .trace import ObservationWindow, SynthConfig, generate_synthetic, read_trace, write_trace

OUTPUT_ENV = "SOREC_OUTPUT_DIR"
EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=None, help="random seed")
    p.add_argument("-o", "--output-dir", default=None,
                   help=f"output directory (default: ${OUTPUT_ENV} or .)")
    p.add_argument("--format", choices=("csv", "json", "both"), default="both")
    p.add_argument("--workers", type=int, default=1, help="parallel worker cap")
    return p


def _trace_args(p: argparse.ArgumentParser):
    p.add_argument("trace", help="contact trace CSV: node_a,node_b,t_start,t_end")
    p.add_argument("--window", type=int, nargs=2, metavar=("BEGIN", "END"),
                   help="observation window (default: from file or records)")


def _relation_args(p: argparse.ArgumentParser):
    p.add_argument("--max-intermediates", type=int, default=2)
    p.add_argument("--epsilon", type=float, default=0.0,
                   help="ignore hops whose SRS does not exceed this")


def _sir_args(p: argparse.ArgumentParser):
    p.add_argument("--lam", type=float, default=0.1, help="per-slot infection probability")
    p.add_argument("--recovery", choices=("geometric", "fixed"), default="geometric")
    p.add_argument("--mu", type=float, default=0.02, help="per-slot recovery probability")
    p.add_argument("--tau", type=int, default=None, help="fixed infectious period")
    p.add_argument("--runs", type=int, default=500)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="sorec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic trace")
    p.add_argument("--config", help="JSON synth config; flags override its keys")
    p.add_argument("--nodes", type=int, dest="node_count")
    p.add_argument("--window-length", type=int)
    p.add_argument("--communities", type=int)
    p.add_argument("--hubs", dest="hub_nodes", type=lambda s: [int(x) for x in s.split(",") if x],
                   help="comma-separated hub node ids")
    p.add_argument("--intra-rate", type=float)
    p.add_argument("--inter-rate", type=float)
    p.add_argument("--hub-rate", type=float)
    p.add_argument("--epoch-length", type=int)
    p.add_argument("--mean-duration", type=float)
    p.add_argument("--activity-sigma", type=float)
    p.add_argument("--out", help="trace path (default: <output-dir>/trace.csv)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("srs", parents=[common], help="direct/indirect relations")
    _trace_args(p)
    _relation_args(p)
    p.set_defaults(func=cmd_srs)

    p = sub.add_parser("centrality", parents=[common], help="SoReC and baseline scores")
    _trace_args(p)
    _relation_args(p)
    p.add_argument("--measure", action="append", choices=MEASURES + ("all",),
                   help="repeatable; default sorec")
    p.set_defaults(func=cmd_centrality)

    p = sub.add_parser("sir", parents=[common], help="Monte Carlo SIR ground truth")
    _trace_args(p)
    _sir_args(p)
    p.add_argument("--per-run", action="store_true", help="also dump every run")
    p.set_defaults(func=cmd_sir)

    p = sub.add_parser("evaluate", parents=[common], help="train/test evaluation report")
    _trace_args(p)
    _relation_args(p)
    _sir_args(p)
    p.add_argument("--split", type=float, default=0.6)
    p.add_argument("--measure", action="append", choices=MEASURES + ("all",),
                   help="repeatable; default all")
    p.add_argument("--granularity", default="1 slot",
                   help="real time represented by one slot, echoed in the report")
    p.add_argument("--sweep-gaps", type=lambda s: [int(x) for x in s.split(",") if x],
                   help="comma-separated gaps; needs --train-length and --test-length")
    p.add_argument("--train-length", type=int)
    p.add_argument("--test-length", type=int)
    p.set_defaults(func=cmd_evaluate)
    return parser


# --------------------------------------------------------------------------


def _outdir(args) -> Path:
    out = Path(args.output_dir or os.environ.get(OUTPUT_ENV) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def _echo_line(args) -> str:
    return "config: " + json.dumps(_echo(args), sort_keys=True)


def _load(args):
    window = ObservationWindow(*args.window) if args.window else None
    return read_trace(args.trace, window)


def _measures(args, default) -> tuple[str, ...]:
    chosen = args.measure or list(default)
    if "all" in chosen:
        return MEASURES
    return tuple(dict.fromkeys(chosen))


def _sir_config(args) -> SIRConfig:
    return SIRConfig(infection_prob=args.lam, recovery=args.recovery, recovery_prob=args.mu,
                     recovery_period=args.tau, runs=args.runs,
                     rng_seed=0 if args.seed is None else args.seed)


def cmd_synth(args) -> int:
    data = json.loads(Path(args.config).read_text()) if args.config else {}
    for key in ("node_count", "window_length", "communities", "hub_nodes", "intra_rate",
                "inter_rate", "hub_rate", "epoch_length", "mean_duration",
                "activity_sigma"):
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    if args.seed is not None:
        data["seed"] = args.seed
    if "hub_nodes" not in data and "node_count" in data:
        # spread the default three hubs over the first communities
        n = data["node_count"]
        c = data.get("communities", SynthConfig.communities)
        data["hub_nodes"] = sorted({(k * n) // c for k in range(min(3, c))})
    config = SynthConfig.from_dict(data)
    trace = generate_synthetic(config)
    out = Path(args.out) if args.out else _outdir(args) / "trace.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    write_trace(trace, out, comments=["synth " + json.dumps(config.to_dict(), sort_keys=True)])
    print(f"wrote {len(trace)} records for {len(trace.nodes)} nodes to {out}")
    return 0


def cmd_srs(args) -> int:
    trace = _load(args)
    result = compute_sorec(trace, SoRecConfig(args.max_intermediates, args.epsilon))
    out = _outdir(args)
    write_srs_csv(result.srs, out / "srs.csv", comments=[_echo_line(args)])
    spheres = json.loads(spheres_to_json(result.spheres))
    (out / "spheres.json").write_text(
        json.dumps({"config": _echo(args), "spheres": spheres}, indent=1) + "\n")
    print(f"wrote {out / 'srs.csv'} and {out / 'spheres.json'}")
    return 0


def cmd_centrality(args) -> int:
    trace = _load(args)
    measures = _measures(args, ("sorec",))
    tables = compute_scores(trace, measures, SoRecConfig(args.max_intermediates, args.epsilon))
    out = _outdir(args)
    if args.format in ("csv", "both"):
        for name, table in tables.items():
            write_scores_csv(rank_nodes(table), out / f"{name}.csv", comments=[_echo_line(args)])
    if args.format in ("json", "both"):
        (out / "scores.json").write_text(scores_bundle_json(tables, _echo(args)) + "\n")
    print(f"wrote {', '.join(tables)} scores to {out}")
    return 0


def cmd_sir(args) -> int:
    trace = _load(args)
    config = _sir_config(args)
    outcomes = monte_carlo_influence(trace, config, workers=args.workers,
                                     keep_runs=args.per_run)
    out = _outdir(args)
    write_outcomes_csv(outcomes, out / "sir.csv", comments=[_echo_line(args)],
                       per_run_path=out / "sir_runs.csv" if args.per_run else None)
    print(f"wrote {out / 'sir.csv'}")
    return 0


def cmd_evaluate(args) -> int:
    trace = _load(args)
    measures = _measures(args, MEASURES)
    sorec_config = SoRecConfig(args.max_intermediates, args.epsilon)
    sir_config = _sir_config(args)
    out = _outdir(args)
    if args.sweep_gaps:
        if args.train_length is None or args.test_length is None:
            raise UsageError("--sweep-gaps needs --train-length and --test-length")
        reports = evaluate_sweep(trace, args.train_length, args.test_length, args.sweep_gaps,
                                 sorec_config, sir_config, measures, args.workers)
        for gap, report in reports.items():
            report.config["cli"] = _echo(args)
            write_report(report, out / f"gap_{gap}")
        print(f"wrote {len(reports)} reports under {out}")
        return 0
    report = evaluate_pipeline(trace, args.split, sorec_config, sir_config, measures,
                               args.workers, args.granularity)
    report.config["cli"] = _echo(args)
    write_report(report, out)
    print(f"wrote {out / 'report.json'}")
    for c in report.correlations:
        print(f"  {c.measure:12s} {c.target:6s} rho={c.rho:+.4f}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"sorec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError, OSError) as exc:
        print(f"sorec: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
