"""Command-line entry point: ``sycos search|generate|bench|select``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

from . import datagen
from .bench import run_variants
from .core import ConfigError, IngestError, SearchParams, SycosError, TimeSeriesPair
from .io import IngestSpec, WindowReport, ingest, write_pair_csv
from .parallel import run_parallel
from .selector import select


def _seed(value: Optional[int]) -> int:
    if value is not None:
        return value
    env = os.environ.get("SYCOS_SEED")
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"SYCOS_SEED must be an integer, got {env!r}") from None


def _add_input(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("input")
    g.add_argument("input", help="CSV with both series, or the x series when --y-input is given")
    g.add_argument("--y-input", help="CSV holding the y series")
    g.add_argument("--x-column", default="x")
    g.add_argument("--y-column", default="y")
    g.add_argument("--value-column", default="value", help="value column for two-file input")
    g.add_argument("--time-column", help="timestamp column used for alignment and reporting")
    g.add_argument("--aggregate", help="bucket rule: pandas frequency (e.g. 1min) or row count")
    g.add_argument("--no-jitter", action="store_true", help="skip the de-tie jitter")


def _add_params(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("search parameters")
    g.add_argument("--sigma", type=float, default=0.2)
    g.add_argument("--tau-ratio", type=float, default=0.25)
    g.add_argument("--delta", type=int, help="step for both searches (default: derived)")
    g.add_argument("--delta-td", type=int)
    g.add_argument("--delta-bu", type=int)
    g.add_argument("--smin", type=int, default=30)
    g.add_argument("--smax", type=int)
    g.add_argument("--k", type=int, default=4)
    g.add_argument("--max-idle", type=int, default=2)
    g.add_argument("--history", type=int, default=5)
    g.add_argument("--p", type=int, default=3)
    g.add_argument("--alpha", type=float, default=0.5)
    g.add_argument("--rho", type=float, default=0.5)
    g.add_argument("--m", type=int, default=6)
    g.add_argument("--big-m", type=int, default=20)
    g.add_argument("--seed", type=int, help="random seed (falls back to $SYCOS_SEED, then 0)")
    g.add_argument("--no-noise-pruning", action="store_true")
    g.add_argument("--no-incremental", action="store_true")


def _params(a: argparse.Namespace) -> SearchParams:
    return SearchParams(
        sigma=a.sigma, tau_ratio=a.tau_ratio,
        delta_td=a.delta_td if a.delta_td is not None else a.delta,
        delta_bu=a.delta_bu if a.delta_bu is not None else a.delta,
        s_min=a.smin, s_max=a.smax, k=a.k, t_max_idle=a.max_idle, h=a.history, p=a.p,
        alpha=a.alpha, rho=a.rho, m=a.m, M=a.big_m, seed=_seed(a.seed),
    )


def _load(a: argparse.Namespace) -> TimeSeriesPair:
    agg = a.aggregate
    if agg is not None and agg.isdigit():
        agg = int(agg)
    spec = IngestSpec(a.input, a.y_input, x_column=a.x_column, y_column=a.y_column,
                      value_column=a.value_column, timestamp_column=a.time_column,
                      aggregate=agg, jitter=not a.no_jitter, seed=_seed(a.seed))
    return ingest(spec)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_search(a: argparse.Namespace) -> int:
    pair = _load(a)
    params = _params(a).validate(len(pair))
    res = run_parallel(pair, params, method=a.method, n_p=a.chunks, workers=a.workers,
                       noise_pruning=not a.no_noise_pruning, incremental=not a.no_incremental)
    extra = {"method": res.method, "n": len(pair), "chunks": a.chunks}
    if res.selection is not None:
        extra["selection"] = {"chosen": res.selection.chosen,
                              "nscore_td": res.selection.nscore_td,
                              "nscore_bu": res.selection.nscore_bu}
    report = WindowReport.from_results(res.results, pair, params, res.stats, **extra)
    _emit(report.to_csv() if a.format == "csv" else report.to_json(), a.out)
    return 0


def cmd_select(a: argparse.Namespace) -> int:
    pair = _load(a)
    params = _params(a).validate(len(pair))
    rep = select(pair, params, noise_pruning=not a.no_noise_pruning,
                 incremental=not a.no_incremental)
    _emit(json.dumps(rep.to_dict(), sort_keys=True, indent=2) + "\n", a.out)
    return 0


def cmd_bench(a: argparse.Namespace) -> int:
    if a.input == "embedded":
        pair, _ = datagen.embedded_block(_seed(a.seed))
    else:
        pair = _load(a)
    params = _params(a).validate(len(pair))
    methods = ("TD", "BU") if a.method == "both" else (a.method.upper(),)
    _emit(json.dumps(run_variants(pair, params, methods), sort_keys=True, indent=2) + "\n", a.out)
    return 0


def cmd_generate(a: argparse.Namespace) -> int:
    seed = _seed(a.seed)
    truth = []
    if a.relation:
        pair = datagen.generate_relation(datagen.RelationSpec(a.relation, a.n, noise=a.noise,
                                                              seed=seed))
    elif a.scenario == "dense":
        pair, truth = datagen.dense_scenario(seed)
    elif a.scenario == "sparse":
        pair, truth = datagen.sparse_scenario(seed)
    elif a.scenario == "embedded":
        pair, truth = datagen.embedded_block(seed)
    else:
        pair, truth = datagen.generate_scenario(datagen.ScenarioSpec(a.n, seed=seed))
    write_pair_csv(pair, a.out)
    if truth:
        sys.stderr.write("blocks: " + " ".join(f"[{w.start}, {w.end})" for w in truth) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sycos",
                                     description="Find correlated windows between two series.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("search", help="search for correlated windows")
    _add_input(p)
    _add_params(p)
    p.add_argument("--method", choices=["td", "bu", "auto"], default="auto")
    p.add_argument("--chunks", type=int, default=1, help="number of overlapping chunks")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("select", help="report which search the trial runs favor")
    _add_input(p)
    _add_params(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("bench", help="paired runs of origin / noise / mi_opt / both")
    _add_input(p)
    _add_params(p)
    p.add_argument("--method", choices=["td", "bu", "both"], default="both")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("generate", help="write a synthetic fixture as CSV")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--relation", choices=sorted(datagen.RELATIONS))
    g.add_argument("--scenario", choices=["dense", "sparse", "embedded", "background"])
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"sycos: config error: {exc}", file=sys.stderr)
        return 2
    except (IngestError, SycosError, OSError, ValueError) as exc:
        print(f"sycos: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
