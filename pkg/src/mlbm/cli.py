"""``mlbm`` command line: generate | fit | eval | experiment.

Exit status is 0 on success, 1 on a runtime failure (unreadable or invalid
data, failed fit) and 2 on a usage error (bad flags, unknown layout, bad plan).
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict, fields
from pathlib import Path

from . import io
from .core import ModelSpec
from .datagen import CONFUSIONS, builtin_layouts, generate, make_config
from .errors import MLBMError, UnknownLayout
from .evaluation import ari, column_aris
from .experiment import MODES, ExperimentPlan, run_experiment, worker_count, write_outputs
from .vem import VemConfig, fit

logger = logging.getLogger("mlbm")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Raised for problems with the invocation rather than the data."""


def _nan_to_none(v):
    return None if isinstance(v, float) and math.isnan(v) else v


def cmd_generate(args) -> int:
    try:
        cfg = make_config(args.layout, args.size, args.confusion, seed=args.seed,
                          n_cols=args.cols)
        cfg.check()
    except (UnknownLayout, ValueError) as exc:
        raise UsageError(str(exc)) from None
    ds = generate(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_data(out / "data.csv", ds.data)
    io.write_partition(out / "truth.csv", ds.truth)
    io.write_json(out / "config.json", {k: v for k, v in cfg.to_dict().items()
                                        if k != "schema_version"})
    logger.info("wrote %s rows x (%d + %d) columns to %s", cfg.n, cfg.d_c, cfg.d_d, out)
    return EXIT_OK


def _vem_config(args) -> VemConfig:
    try:
        return VemConfig(
            max_outer=args.max_iter, max_inner=args.inner_max_iter,
            eps_inner=args.eps_inner, eps_outer=args.eps_outer,
            min_outer=args.min_outer, warmup_steps=args.warmup_steps,
            warmup_damping=args.warmup_damping, n_restarts=args.restarts,
            seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_fit(args) -> int:
    cfg = _vem_config(args)
    x = io.read_data(args.data)
    if args.mode == "continuous":
        x = x.continuous_only()
    elif args.mode == "binary":
        x = x.binary_only()
    spec = ModelSpec.for_data(x, args.g, args.mc, args.md)
    res = fit(x, spec, cfg, n_jobs=min(worker_count(), cfg.n_restarts))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_json(out / "params.json", io.fit_document(res, {
        "mode": args.mode, "spec": asdict(spec),
        "vem": {f.name: getattr(cfg, f.name) for f in fields(VemConfig)},
    }))
    io.write_memberships(out / "memberships.csv", res.memberships)
    io.write_partition(out / "partition.csv", res.partition)
    io.write_trace(out / "fc_trace.csv", res.fc_trace)
    logger.info("fc=%.6f after %d outer iterations (converged=%s)",
                res.fc, res.outer_iters, res.converged)
    return EXIT_OK


def cmd_eval(args) -> int:
    a = io.read_partition(args.first)
    b = io.read_partition(args.second)
    report = {"ari": ari(a.row_labels, b.row_labels), "n": int(a.row_labels.size),
              "clusters_first": int(len(set(a.row_labels.tolist()))),
              "clusters_second": int(len(set(b.row_labels.tolist())))}
    report.update({k: _nan_to_none(v) for k, v in column_aris(a, b).items()})
    print(json.dumps(report, sort_keys=True))
    return EXIT_OK


def cmd_experiment(args) -> int:
    try:
        plan = ExperimentPlan.from_dict(json.loads(Path(args.plan).read_text()))
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{args.plan}: {exc}") from None
    results = run_experiment(plan, workers=args.workers)
    written = write_outputs(plan, results, args.out or plan.output_dir)
    failed = sum(r["status"] != "ok" for r in results)
    logger.info("%d result rows (%d failed); wrote %d files", len(results), failed, len(written))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mlbm", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="draw a synthetic dataset with known partitions")
    g.add_argument("--layout", required=True,
                   help=f"one of {', '.join(sorted(builtin_layouts()))}")
    g.add_argument("--size", type=int, required=True, help="number of rows n")
    g.add_argument("--cols", type=int, default=None,
                   help="columns per type (default: n, a square design)")
    g.add_argument("--confusion", choices=list(CONFUSIONS), default="low")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--out", required=True, help="output directory")
    g.set_defaults(func=cmd_generate)

    f = sub.add_parser("fit", help="fit a mixed latent block model to a data CSV")
    f.add_argument("data", help="data CSV (c_* continuous, b_* binary columns)")
    f.add_argument("--g", type=int, required=True, help="row clusters")
    f.add_argument("--mc", type=int, default=2, help="continuous column clusters")
    f.add_argument("--md", type=int, default=2, help="binary column clusters")
    d = VemConfig()
    f.add_argument("--restarts", type=int, default=d.n_restarts)
    f.add_argument("--max-iter", type=int, default=d.max_outer)
    f.add_argument("--inner-max-iter", type=int, default=d.max_inner)
    f.add_argument("--eps-inner", type=float, default=d.eps_inner)
    f.add_argument("--eps-outer", type=float, default=d.eps_outer)
    f.add_argument("--min-outer", type=int, default=d.min_outer)
    f.add_argument("--warmup-steps", type=int, default=d.warmup_steps)
    f.add_argument("--warmup-damping", type=float, default=d.warmup_damping)
    f.add_argument("--seed", type=int, default=d.seed)
    f.add_argument("--mode", choices=MODES, default="mixed")
    f.add_argument("-o", "--out", required=True, help="output directory")
    f.set_defaults(func=cmd_fit)

    e = sub.add_parser("eval", help="ARI between two partition CSVs")
    e.add_argument("first")
    e.add_argument("second")
    e.set_defaults(func=cmd_eval)

    x = sub.add_parser("experiment", help="run a JSON experiment plan")
    x.add_argument("plan", help="plan JSON file")
    x.add_argument("-o", "--out", default=None, help="override the plan's output_dir")
    x.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: MLBM_THREADS or CPU count)")
    x.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"mlbm {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MLBMError, OSError, ValueError) as exc:
        print(f"mlbm {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
