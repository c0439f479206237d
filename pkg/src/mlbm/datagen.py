"""Synthetic mixed-data benchmarks with known block structure.

A :class:`Layout` assigns each (row cluster, column cluster) block one of two
parameter levels, 1 or 2.  The :class:`ConfusionLevel` maps level 1 to
``(mu1, alpha1)`` and level 2 to ``(mu2, alpha2)`` and fixes the Gaussian
standard deviation, so the same layout can be replayed at any overlap.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .core import HardPartition, MixedDataMatrix, ModelParams
from .errors import LayoutMismatch, UnknownLayout


@dataclass(frozen=True)
class ConfusionLevel:
    name: str
    mu: tuple = (1.0, 2.0)
    sigma: float = 0.25
    alpha: tuple = (0.2, 0.8)


LOW = ConfusionLevel("low", sigma=0.25, alpha=(0.2, 0.8))
MEDIUM = ConfusionLevel("medium", sigma=0.5, alpha=(0.3, 0.7))
HIGH = ConfusionLevel("high", sigma=1.0, alpha=(0.4, 0.6))
CONFUSIONS = {c.name: c for c in (LOW, MEDIUM, HIGH)}


def confusion(name) -> ConfusionLevel:
    if isinstance(name, ConfusionLevel):
        return name
    try:
        return CONFUSIONS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown confusion level {name!r}; "
                         f"expected one of {sorted(CONFUSIONS)}") from None


@dataclass(frozen=True)
class Layout:
    """Parameter levels per block: ``cont[k][l]`` and ``bin[k][l]`` are 1 or 2."""

    name: str
    cont: tuple
    bin: tuple

    def __post_init__(self):
        for part in (self.cont, self.bin):
            if len({len(r) for r in part}) > 1:
                raise LayoutMismatch(f"layout {self.name!r} has ragged rows")
            if any(v not in (1, 2) for r in part for v in r):
                raise LayoutMismatch(f"layout {self.name!r} uses levels other than 1/2")
        if len(self.cont) != len(self.bin):
            raise LayoutMismatch(f"layout {self.name!r}: continuous and binary parts "
                                 "have different numbers of row clusters")

    @property
    def g(self) -> int:
        return len(self.cont)

    @property
    def m_c(self) -> int:
        return len(self.cont[0]) if self.cont else 0

    @property
    def m_d(self) -> int:
        return len(self.bin[0]) if self.bin else 0


def _same(table, name):
    return Layout(name, table, table)


_LAYOUTS = {
    "exp1": Layout("exp1",
                   cont=((2, 1), (2, 2), (2, 1), (2, 2)),
                   bin=((2, 1), (2, 1), (2, 2), (2, 2))),
    "exp2-222": _same(((1, 1), (1, 2)), "exp2-222"),
    "exp2-333": _same(((1, 2, 1), (1, 2, 2), (1, 1, 1)), "exp2-333"),
    "exp2-444": _same(((2, 1, 2, 1), (2, 1, 2, 2), (2, 2, 2, 2), (2, 1, 1, 1)),
                      "exp2-444"),
    "sym-222": _same(((1, 2), (2, 1)), "sym-222"),
    "sym-333": _same(((1, 1, 2), (1, 2, 1), (2, 1, 1)), "sym-333"),
    "sym-444": _same(((1, 1, 1, 2), (1, 1, 2, 1), (1, 2, 1, 1), (2, 1, 1, 1)),
                     "sym-444"),
}


@dataclass(frozen=True)
class GenConfig:
    """Everything needed to draw one synthetic dataset.

    Cluster size proportions default to equal sizes.
    """

    n: int
    d_c: int
    d_d: int
    layout: Layout
    confusion: ConfusionLevel = LOW
    row_props: tuple | None = None
    ccol_props: tuple | None = None
    bcol_props: tuple | None = None
    seed: int = 0

    def proportions(self):
        lay = self.layout
        out = []
        for props, k in ((self.row_props, lay.g), (self.ccol_props, lay.m_c),
                         (self.bcol_props, lay.m_d)):
            p = np.full(k, 1.0 / k) if props is None else np.asarray(props, float)
            if p.shape != (k,):
                raise LayoutMismatch(f"{len(p)} proportions given for {k} clusters")
            if (p < 0).any() or abs(p.sum() - 1) > 1e-9:
                raise LayoutMismatch(f"proportions {p.tolist()} do not sum to 1")
            out.append(p)
        return out

    def check(self):
        if self.n < 1 or self.d_c < 0 or self.d_d < 0 or self.d_c + self.d_d < 1:
            raise LayoutMismatch(f"illegal sizes n={self.n}, d_c={self.d_c}, d_d={self.d_d}")
        if self.d_c and not self.layout.m_c or self.d_d and not self.layout.m_d:
            raise LayoutMismatch("layout lacks column clusters for a requested column type")
        self.proportions()

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "n": self.n, "d_c": self.d_c, "d_d": self.d_d,
            "layout": {"name": self.layout.name,
                       "cont": [list(r) for r in self.layout.cont],
                       "bin": [list(r) for r in self.layout.bin]},
            "confusion": {"name": self.confusion.name, "mu": list(self.confusion.mu),
                          "sigma": self.confusion.sigma,
                          "alpha": list(self.confusion.alpha)},
            "row_props": None if self.row_props is None else list(self.row_props),
            "ccol_props": None if self.ccol_props is None else list(self.ccol_props),
            "bcol_props": None if self.bcol_props is None else list(self.bcol_props),
            "seed": self.seed,
        }


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    data: MixedDataMatrix
    truth: HardPartition
    config: GenConfig = field(repr=False)


def builtin_layouts() -> dict:
    """Named layouts: ``exp1``, ``exp2-222/333/444`` and ``sym-222/333/444``."""
    return dict(_LAYOUTS)


def get_layout(name: str) -> Layout:
    try:
        return _LAYOUTS[name]
    except KeyError:
        raise UnknownLayout(f"unknown layout {name!r}; "
                            f"available: {', '.join(sorted(_LAYOUTS))}") from None


def make_config(layout: str | Layout, n: int, confusion_level="low", seed: int = 0,
                n_cols: int | None = None, **kw) -> GenConfig:
    """Config for a named layout; square by default (``d_c = d_d = n``)."""
    lay = get_layout(layout) if isinstance(layout, str) else layout
    d = n if n_cols is None else n_cols
    return GenConfig(n=n, d_c=d if lay.m_c else 0, d_d=d if lay.m_d else 0,
                     layout=lay, confusion=confusion(confusion_level), seed=seed, **kw)


def cluster_sizes(total: int, props) -> np.ndarray:
    """Split ``total`` items by proportion: floors, then largest remainders.

    Remainder ties go to the lowest cluster index.
    """
    props = np.asarray(props, float)
    raw = total * props
    sizes = np.floor(raw).astype(np.int64)
    short = total - sizes.sum()
    order = np.argsort(-(raw - sizes), kind="stable")
    sizes[order[:short]] += 1
    return sizes


def _labels(rng, total, props):
    labels = np.repeat(np.arange(len(props)), cluster_sizes(total, props))
    return labels[rng.permutation(total)]


def true_params(cfg: GenConfig) -> ModelParams:
    """Generating parameters laid out as a :class:`ModelParams`."""
    lay, conf = cfg.layout, cfg.confusion
    pi, rc, rd = cfg.proportions()
    cont = np.asarray(lay.cont, dtype=np.int64).reshape(lay.g, lay.m_c) - 1
    binr = np.asarray(lay.bin, dtype=np.int64).reshape(lay.g, lay.m_d) - 1
    if not cfg.d_c:
        cont, rc = cont[:, :0], rc[:0]
    if not cfg.d_d:
        binr, rd = binr[:, :0], rd[:0]
    mu = np.asarray(conf.mu, float)[cont]
    return ModelParams(pi, rc, rd, mu, np.full(mu.shape, conf.sigma**2),
                       np.asarray(conf.alpha, float)[binr])


def generate(cfg: GenConfig) -> LabeledDataset:
    """Draw a dataset and its true partition.

    Labels come from contiguous blocks of the requested sizes, shuffled with
    the config seed; each cell is then drawn from its block distribution.
    The seeded draw order is: row labels, continuous-column labels,
    binary-column labels, continuous cells, binary cells.
    """
    cfg.check()
    theta = true_params(cfg)
    pi, rc, rd = cfg.proportions()
    rng = np.random.default_rng(cfg.seed)
    z = _labels(rng, cfg.n, pi)
    wc = _labels(rng, cfg.d_c, rc) if cfg.d_c else np.zeros(0, np.int64)
    wd = _labels(rng, cfg.d_d, rd) if cfg.d_d else np.zeros(0, np.int64)
    cont = rng.normal(theta.mu[np.ix_(z, wc)], cfg.confusion.sigma)
    binr = (rng.random((cfg.n, cfg.d_d)) < theta.alpha[np.ix_(z, wd)]).astype(float)
    data = MixedDataMatrix(cont.reshape(cfg.n, cfg.d_c), binr)
    return LabeledDataset(data, HardPartition(z, wc, wd), cfg)


def with_confusion(cfg: GenConfig, level) -> GenConfig:
    return replace(cfg, confusion=confusion(level))
