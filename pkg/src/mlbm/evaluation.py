"""Partition agreement, parameter-recovery error and sample summaries."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import FitResult, HardPartition, ModelParams, SoftMemberships
from .errors import EmptyInput, LengthMismatch

KDE_POINTS = 64


def _comb2(v):
    v = np.asarray(v, dtype=np.int64)
    return int((v * (v - 1) // 2).sum())


def contingency(a, b) -> np.ndarray:
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)
    return table


def ari(a, b) -> float:
    """Hubert-Arabie adjusted Rand index of two label vectors.

    Pair counts are exact integers.  When the chance-corrected denominator is
    zero (both partitions trivial or both all-singletons) the partitions are
    necessarily identical and 1.0 is returned.  Values may be negative.
    """
    a, b = np.asarray(a).ravel(), np.asarray(b).ravel()
    if a.shape != b.shape:
        raise LengthMismatch(f"label vectors of length {a.size} and {b.size}")
    if a.size < 2:
        raise LengthMismatch("ARI needs at least two items")
    table = contingency(a, b)
    index = _comb2(table)
    sum_a = _comb2(table.sum(axis=1))
    sum_b = _comb2(table.sum(axis=0))
    pairs = a.size * (a.size - 1) // 2
    # scale everything by `pairs` to keep the numerator integral
    num = index * pairs - sum_a * sum_b
    den = (sum_a + sum_b) * pairs - 2 * sum_a * sum_b
    if den == 0:
        return 1.0
    return 2 * num / den


def cross_ari(fit_a: FitResult, fit_b: FitResult) -> float:
    """ARI between the hard row partitions of two fits on the same rows."""
    return ari(fit_a.partition.row_labels, fit_b.partition.row_labels)


def column_aris(truth: HardPartition, found: HardPartition) -> dict:
    """Continuous, binary and size-weighted combined column ARIs (NaN when absent)."""
    out = {"ccol_ari": np.nan, "bcol_ari": np.nan, "col_ari": np.nan}
    weights, values = [], []
    for key, t, f in (("ccol_ari", truth.ccol_labels, found.ccol_labels),
                      ("bcol_ari", truth.bcol_labels, found.bcol_labels)):
        if t.size >= 2 and f.size == t.size:
            out[key] = ari(t, f)
            weights.append(t.size)
            values.append(out[key])
    if weights:
        out["col_ari"] = float(np.average(values, weights=weights))
    return out


def match_clusters(true_labels, memberships, k_true: int | None = None) -> np.ndarray:
    """Align fitted clusters to true ones by maximum membership overlap.

    Returns ``perm`` such that fitted cluster ``perm[k]`` is matched to true
    cluster ``k``.  With more fitted than true clusters the surplus is
    appended at the end; with fewer, unmatched true clusters get -1.
    """
    true_labels = np.asarray(true_labels, dtype=np.int64)
    memberships = np.asarray(memberships, float)
    k_true = int(true_labels.max()) + 1 if k_true is None else k_true
    k_fit = memberships.shape[1]
    overlap = np.zeros((k_true, k_fit))
    np.add.at(overlap, true_labels, memberships)
    rows, cols = linear_sum_assignment(overlap, maximize=True)
    perm = np.full(max(k_true, k_fit), -1, dtype=np.int64)
    perm[rows] = cols
    rest = [c for c in range(k_fit) if c not in set(cols)]
    perm[k_true:k_true + len(rest)] = rest
    return perm


@dataclass(frozen=True)
class ParamErrors:
    mu: float
    sigma: float
    alpha: float

    def as_dict(self):
        return asdict(self)


def align_params(params: ModelParams, memberships: SoftMemberships,
                 truth: HardPartition, true: ModelParams) -> ModelParams:
    """Fitted parameters reordered to match the true clusters.

    Requires the fitted and true cluster counts to agree.
    """
    spec = true.spec
    if params.spec != spec:
        raise LengthMismatch(f"fitted {params.spec} vs true {spec}")
    rows = match_clusters(truth.row_labels, memberships.s, spec.g)
    cc = match_clusters(truth.ccol_labels, memberships.tc, spec.m_c) if spec.m_c else None
    bc = match_clusters(truth.bcol_labels, memberships.td, spec.m_d) if spec.m_d else None
    return params.permuted(rows, cc, bc)


def param_errors(fit: FitResult, truth: HardPartition, true: ModelParams) -> ParamErrors:
    """Largest absolute deviation of mu, sigma and alpha after cluster matching."""
    est = align_params(fit.params, fit.memberships, truth, true)

    def worst(a, b):
        return float(np.abs(a - b).max()) if a.size else float("nan")

    return ParamErrors(worst(est.mu, true.mu), worst(est.sigma, true.sigma),
                       worst(est.alpha, true.alpha))


@dataclass(frozen=True)
class Summary:
    count: int
    mean: float
    median: float
    sd: float
    min: float
    max: float
    bandwidth: float
    grid: tuple
    density: tuple

    def stats(self) -> dict:
        return {k: getattr(self, k) for k in ("count", "mean", "median", "sd", "min", "max")}


def silverman_bandwidth(values) -> float:
    """Silverman's rule of thumb; falls back to a small width for constant samples."""
    v = np.asarray(values, float)
    sd = v.std(ddof=1) if v.size > 1 else 0.0
    q75, q25 = np.percentile(v, [75, 25])
    spread = min(sd, (q75 - q25) / 1.34) if q75 > q25 else sd
    h = 0.9 * spread * v.size ** (-0.2)
    if not h > 0:
        h = 0.01 * max(1.0, abs(float(v.mean())))
    return float(h)


def summarize(samples) -> Summary:
    """Moments (population sd) plus a Gaussian KDE on a 64-point grid."""
    v = np.asarray(list(samples), dtype=float)
    if v.size == 0:
        raise EmptyInput("cannot summarize an empty sample")
    h = silverman_bandwidth(v)
    grid = np.linspace(v.min() - 3 * h, v.max() + 3 * h, KDE_POINTS)
    z = (grid[:, None] - v[None, :]) / h
    dens = np.exp(-0.5 * z**2).sum(axis=1) / (v.size * h * np.sqrt(2 * np.pi))
    return Summary(int(v.size), float(v.mean()), float(np.median(v)), float(v.std()),
                   float(v.min()), float(v.max()), h, tuple(grid.tolist()),
                   tuple(dens.tolist()))
