"""Experiment grids: generate, fit in every analysis mode, score, summarise, plot."""
from __future__ import annotations

import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import io, svg
from .core import HardPartition, ModelSpec
from .datagen import CONFUSIONS, generate, get_layout, make_config, true_params
from .errors import MLBMError, ValidationError
from .evaluation import ari, column_aris, param_errors, summarize
from .vem import VemConfig, fit

logger = logging.getLogger(__name__)

MODES = ("continuous", "binary", "mixed")
RESULT_COLUMNS = (
    "layout", "n", "d_c", "d_d", "confusion", "sample", "mode", "seed",
    "row_ari", "ccol_ari", "bcol_ari", "cross_row_ari", "fc_final", "outer_iters",
    "wall_ms", "status",
    # appended after the stable core schema
    "col_ari", "mu_err", "sigma_err", "alpha_err",
)
SUMMARY_COLUMNS = ("layout", "n", "confusion", "mode", "metric",
                   "count", "mean", "median", "sd", "min", "max")
SUMMARY_METRICS = ("row_ari", "ccol_ari", "bcol_ari", "col_ari")


@dataclass(frozen=True)
class ExperimentPlan:
    layout: str
    sizes: tuple
    confusions: tuple = ("low", "medium", "high")
    samples: int = 3
    modes: tuple = MODES
    vem: VemConfig = field(default_factory=VemConfig)
    seed: int = 0
    output_dir: str = "results"
    n_cols: int | None = None

    def __post_init__(self):
        get_layout(self.layout)
        if not self.sizes or not self.confusions or not self.modes:
            raise ValidationError("sizes, confusions and modes must be non-empty")
        if self.samples < 1:
            raise ValidationError("samples must be >= 1")
        for c in self.confusions:
            if c not in CONFUSIONS:
                raise ValidationError(f"unknown confusion level {c!r}")
        for m in self.modes:
            if m not in MODES:
                raise ValidationError(f"unknown mode {m!r}")

    @classmethod
    def from_dict(cls, doc: dict) -> ExperimentPlan:
        if doc.get("schema_version", 1) != 1:
            raise ValidationError(f"unsupported plan schema_version {doc['schema_version']!r}")
        if "layout" not in doc or "sizes" not in doc:
            raise ValidationError("a plan needs at least 'layout' and 'sizes'")
        vem_fields = {f.name for f in fields(VemConfig)}
        vem_doc = doc.get("vem", {})
        unknown = set(vem_doc) - vem_fields
        if unknown:
            raise ValidationError(f"unknown vem settings: {sorted(unknown)}")
        return cls(
            layout=doc["layout"],
            sizes=tuple(int(s) for s in doc["sizes"]),
            confusions=tuple(doc.get("confusions", ("low", "medium", "high"))),
            samples=int(doc.get("samples", 3)),
            modes=tuple(doc.get("modes", MODES)),
            vem=VemConfig(**vem_doc),
            seed=int(doc.get("seed", 0)),
            output_dir=doc.get("output_dir", "results"),
            n_cols=doc.get("n_cols"),
        )

    def to_dict(self) -> dict:
        return {
            "schema_version": 1, "layout": self.layout, "sizes": list(self.sizes),
            "confusions": list(self.confusions), "samples": self.samples,
            "modes": list(self.modes),
            "vem": {f.name: getattr(self.vem, f.name) for f in fields(VemConfig)},
            "seed": self.seed, "output_dir": self.output_dir, "n_cols": self.n_cols,
        }

    def cells(self):
        """(size, confusion, sample) triples in plan order."""
        return [(n, c, s) for n in self.sizes for c in self.confusions
                for s in range(self.samples)]


def cell_seed(master: int, n: int, conf: str, sample: int) -> int:
    conf_idx = list(CONFUSIONS).index(conf)
    return int(np.random.SeedSequence([master, n, conf_idx, sample]).generate_state(1)[0])


def _view(x, mode):
    return {"continuous": x.continuous_only, "binary": x.binary_only,
            "mixed": lambda: x}[mode]()


def run_cell(plan: ExperimentPlan, n: int, conf: str, sample: int) -> list[dict]:
    """Generate one dataset and fit it in every requested mode."""
    seed = cell_seed(plan.seed, n, conf, sample)
    ds = generate(make_config(plan.layout, n, conf, seed=seed, n_cols=plan.n_cols))
    lay, truth = ds.config.layout, ds.truth
    base = {"layout": plan.layout, "n": n, "d_c": ds.data.d_c, "d_d": ds.data.d_d,
            "confusion": conf, "sample": sample, "seed": seed}
    rows, fits = [], {}
    for mode in plan.modes:
        x = _view(ds.data, mode)
        row = dict(base, mode=mode, row_ari=math.nan, ccol_ari=math.nan,
                   bcol_ari=math.nan, col_ari=math.nan, cross_row_ari=math.nan,
                   fc_final=math.nan, outer_iters=0, mu_err=math.nan,
                   sigma_err=math.nan, alpha_err=math.nan)
        t0 = time.perf_counter()
        try:
            spec = ModelSpec.for_data(x, lay.g, lay.m_c, lay.m_d)
            res = fit(x, spec, replace(plan.vem, seed=seed))
        except MLBMError as exc:
            row.update(wall_ms=round((time.perf_counter() - t0) * 1000),
                       status=f"failed:{type(exc).__name__}")
            logger.warning("cell %s/%s/%d/%s failed: %s", n, conf, sample, mode, exc)
            rows.append(row)
            continue
        row["wall_ms"] = round((time.perf_counter() - t0) * 1000)
        fits[mode] = res
        part = res.partition
        mode_truth = HardPartition(truth.row_labels,
                                 truth.ccol_labels if x.d_c else [],
                                 truth.bcol_labels if x.d_d else [])
        row.update(column_aris(mode_truth, part))
        mode_theta = true_params(replace(ds.config, d_c=x.d_c, d_d=x.d_d))
        row.update(
            row_ari=ari(truth.row_labels, part.row_labels),
            fc_final=res.fc, outer_iters=res.outer_iters, status="ok",
            **{f"{k}_err": v for k, v in
               param_errors(res, mode_truth, mode_theta).as_dict().items()},
        )
        rows.append(row)
    if "continuous" in fits and "binary" in fits:
        cross = ari(fits["continuous"].partition.row_labels,
                    fits["binary"].partition.row_labels)
        for r in rows:
            r["cross_row_ari"] = cross
    return rows


def _run_cell_args(args):
    return run_cell(*args)


def worker_count() -> int:
    env = os.environ.get("MLBM_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_experiment(plan: ExperimentPlan, workers: int | None = None) -> list[dict]:
    """All result rows, in plan order regardless of completion order."""
    workers = worker_count() if workers is None else workers
    jobs = [(plan, *cell) for cell in plan.cells()]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_cell_args, jobs))
    else:
        chunks = [_run_cell_args(j) for j in jobs]
    return [r for chunk in chunks for r in chunk]


def _finite(values):
    return [v for v in values if v is not None and not math.isnan(v)]


def summary_rows(results: list[dict]) -> list[dict]:
    out = []
    keys = []
    for r in results:
        k = (r["layout"], r["n"], r["confusion"], r["mode"])
        if k not in keys:
            keys.append(k)
    for k in keys:
        group = [r for r in results if (r["layout"], r["n"], r["confusion"], r["mode"]) == k]
        for metric in SUMMARY_METRICS:
            vals = _finite(r[metric] for r in group)
            if vals:
                out.append(dict(zip(("layout", "n", "confusion", "mode"), k),
                                metric=metric, **summarize(vals).stats()))
    # cross-ARI is one number per sample, not per mode
    for layout, n, conf in dict.fromkeys((r["layout"], r["n"], r["confusion"]) for r in results):
        per_sample = {r["sample"]: r["cross_row_ari"] for r in results
                      if (r["layout"], r["n"], r["confusion"]) == (layout, n, conf)}
        vals = _finite(per_sample.values())
        if vals:
            out.append(dict(layout=layout, n=n, confusion=conf, mode="cross",
                            metric="cross_row_ari", **summarize(vals).stats()))
    return out


def figures(plan: ExperimentPlan, results: list[dict]) -> dict[str, str]:
    """SVG documents keyed by file name: row/column ARI and cross-ARI per confusion."""
    docs = {}
    for conf in plan.confusions:
        sub = [r for r in results if r["confusion"] == conf]
        for metric, stem, label in (("row_ari", "rows", "ARI of rows"),
                                    ("col_ari", "cols", "ARI of columns")):
            groups = []
            for n in plan.sizes:
                for mode in plan.modes:
                    vals = _finite(r[metric] for r in sub if r["n"] == n and r["mode"] == mode)
                    if vals:
                        groups.append((f"{n} {mode}", summarize(vals), mode))
            if groups:
                docs[f"{stem}_{conf}.svg"] = svg.violin_svg(
                    groups, f"{plan.layout}: {label}, {conf} confusion")
        groups = []
        for n in plan.sizes:
            per_sample = {r["sample"]: r["cross_row_ari"] for r in sub if r["n"] == n}
            vals = _finite(per_sample.values())
            if vals:
                groups.append((str(n), summarize(vals), "cross"))
        if groups:
            docs[f"cross_{conf}.svg"] = svg.violin_svg(
                groups, f"{plan.layout}: continuous vs binary row partitions, {conf} confusion")
    return docs


def write_outputs(plan: ExperimentPlan, results: list[dict], out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [out / "results.csv", out / "summary.csv"]
    io.write_rows(written[0], RESULT_COLUMNS, results)
    io.write_rows(written[1], SUMMARY_COLUMNS, summary_rows(results))
    for name, doc in figures(plan, results).items():
        (out / name).write_text(doc)
        written.append(out / name)
    return written
