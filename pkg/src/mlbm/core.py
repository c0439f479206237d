"""Value types shared by the model, the fitting driver and the tooling.

The continuous and binary parts of a mixed matrix are stored as two separate
arrays, because every update indexes them separately.  All types are treated
as immutable once built; array fields are made read-only on construction.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyMatrix,
    NonBinaryEntry,
    NonFiniteContinuous,
)

#: Lower bound applied to every Gaussian block variance.
VAR_FLOOR = 1e-8
#: Bernoulli parameters are clamped to [ALPHA_EPS, 1 - ALPHA_EPS].
ALPHA_EPS = 1e-6


def _frozen(a, dtype=float, ndim=2):
    arr = np.array(a, dtype=dtype, copy=True)
    if arr.ndim != ndim:
        raise DimensionMismatch(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class MixedDataMatrix:
    """``n`` rows made of ``d_c`` continuous and ``d_d`` binary columns."""

    continuous: np.ndarray
    binary: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.continuous, dtype=float)
        b = np.asarray(self.binary, dtype=float)
        if c.ndim == 1 and c.size == 0:
            c = c.reshape(b.shape[0] if b.ndim == 2 else 0, 0)
        if b.ndim == 1 and b.size == 0:
            b = b.reshape(c.shape[0], 0)
        c, b = _frozen(c), _frozen(b)
        if c.shape[0] != b.shape[0]:
            raise DimensionMismatch(
                f"continuous part has {c.shape[0]} rows, binary part {b.shape[0]}"
            )
        object.__setattr__(self, "continuous", c)
        object.__setattr__(self, "binary", b)

    @classmethod
    def from_continuous(cls, values):
        values = np.asarray(values, dtype=float)
        return cls(values, np.zeros((values.shape[0], 0)))

    @classmethod
    def from_binary(cls, values):
        values = np.asarray(values, dtype=float)
        return cls(np.zeros((values.shape[0], 0)), values)

    @property
    def n(self) -> int:
        return self.continuous.shape[0]

    @property
    def d_c(self) -> int:
        return self.continuous.shape[1]

    @property
    def d_d(self) -> int:
        return self.binary.shape[1]

    @property
    def shape(self):
        return self.n, self.d_c, self.d_d

    def continuous_only(self) -> MixedDataMatrix:
        return MixedDataMatrix(self.continuous, np.zeros((self.n, 0)))

    def binary_only(self) -> MixedDataMatrix:
        return MixedDataMatrix(np.zeros((self.n, 0)), self.binary)

    # Cached derived arrays used by the vectorised updates.  Shifting by the
    # global mean keeps the two-moment variance formula well conditioned.
    @cached_property
    def shift(self) -> float:
        return float(self.continuous.mean()) if self.continuous.size else 0.0

    @cached_property
    def centered(self) -> np.ndarray:
        return self.continuous - self.shift

    @cached_property
    def centered_sq(self) -> np.ndarray:
        return self.centered**2


def validate(x: MixedDataMatrix) -> None:
    """Check the type invariants of ``x``; raise on the first violation.

    Violations are reported in row-major order, continuous part first.
    """
    if x.n < 1 or x.d_c + x.d_d < 1:
        raise EmptyMatrix(f"matrix has shape n={x.n}, d_c={x.d_c}, d_d={x.d_d}")
    bad = ~np.isfinite(x.continuous)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise NonFiniteContinuous(int(i), int(j))
    bad = (x.binary != 0) & (x.binary != 1)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise NonBinaryEntry(int(i), int(j), float(x.binary[i, j]))


@dataclass(frozen=True)
class ModelSpec:
    """Number of row clusters and of column clusters per column type."""

    g: int
    m_c: int = 0
    m_d: int = 0

    @classmethod
    def for_data(cls, x: MixedDataMatrix, g: int, m_c: int, m_d: int) -> ModelSpec:
        """Build a spec for ``x``, dropping the column clusters of absent types."""
        return cls(g, m_c if x.d_c else 0, m_d if x.d_d else 0)

    def check(self, x: MixedDataMatrix) -> None:
        if self.g < 1 or self.m_c < 0 or self.m_d < 0:
            raise DimensionMismatch(f"illegal cluster counts {self}")
        if self.m_c + self.m_d < 1:
            raise DimensionMismatch("at least one column cluster is required")
        if (x.d_c > 0) != (self.m_c > 0):
            raise DimensionMismatch(
                f"d_c={x.d_c} is incompatible with m_c={self.m_c}"
            )
        if (x.d_d > 0) != (self.m_d > 0):
            raise DimensionMismatch(
                f"d_d={x.d_d} is incompatible with m_d={self.m_d}"
            )


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Mixing proportions and per-block parameters.

    ``mu`` and ``sigma2`` are ``g x m_c``; ``alpha`` is ``g x m_d``.
    """

    pi: np.ndarray
    rho_c: np.ndarray
    rho_d: np.ndarray
    mu: np.ndarray
    sigma2: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        for name in ("pi", "rho_c", "rho_d"):
            object.__setattr__(self, name, _frozen(getattr(self, name), ndim=1))
        g = self.pi.shape[0]
        for name, m in (("mu", self.rho_c.shape[0]), ("sigma2", self.rho_c.shape[0]),
                        ("alpha", self.rho_d.shape[0])):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.size == 0:
                arr = arr.reshape(g, m)
            arr = _frozen(arr)
            if arr.shape != (g, m):
                raise DimensionMismatch(f"{name} has shape {arr.shape}, expected {(g, m)}")
            object.__setattr__(self, name, arr)

    @property
    def spec(self) -> ModelSpec:
        return ModelSpec(self.pi.shape[0], self.rho_c.shape[0], self.rho_d.shape[0])

    @property
    def sigma(self) -> np.ndarray:
        return np.sqrt(self.sigma2)

    def check_invariants(self, tol=1e-12) -> None:
        for name in ("pi", "rho_c", "rho_d"):
            v = getattr(self, name)
            if v.size and (abs(v.sum() - 1) > tol or (v < 0).any()):
                raise ValueError(f"{name} is not a probability vector: {v}")
        if (self.sigma2 < VAR_FLOOR).any():
            raise ValueError("sigma2 below VAR_FLOOR")
        if ((self.alpha < ALPHA_EPS) | (self.alpha > 1 - ALPHA_EPS)).any():
            raise ValueError("alpha outside [ALPHA_EPS, 1 - ALPHA_EPS]")

    def permuted(self, rows=None, ccols=None, bcols=None) -> ModelParams:
        """Reorder clusters; ``rows[k]`` is the old index placed at position k."""
        rows = np.arange(self.pi.size) if rows is None else np.asarray(rows)
        ccols = np.arange(self.rho_c.size) if ccols is None else np.asarray(ccols)
        bcols = np.arange(self.rho_d.size) if bcols is None else np.asarray(bcols)
        return ModelParams(
            self.pi[rows], self.rho_c[ccols], self.rho_d[bcols],
            self.mu[np.ix_(rows, ccols)], self.sigma2[np.ix_(rows, ccols)],
            self.alpha[np.ix_(rows, bcols)],
        )

    def to_dict(self) -> dict:
        return {k: getattr(self, k).tolist()
                for k in ("pi", "rho_c", "rho_d", "mu", "sigma2", "alpha")}

    @classmethod
    def from_dict(cls, d) -> ModelParams:
        return cls(**{k: np.asarray(d[k], dtype=float)
                      for k in ("pi", "rho_c", "rho_d", "mu", "sigma2", "alpha")})


@dataclass(frozen=True, eq=False)
class SoftMemberships:
    """Variational membership matrices: ``s`` (n x g), ``tc`` (d_c x m_c), ``td`` (d_d x m_d)."""

    s: np.ndarray
    tc: np.ndarray
    td: np.ndarray

    def __post_init__(self):
        for name in ("s", "tc", "td"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def spec(self) -> ModelSpec:
        return ModelSpec(self.s.shape[1], self.tc.shape[1], self.td.shape[1])

    def replace(self, **kw) -> SoftMemberships:
        return SoftMemberships(kw.get("s", self.s), kw.get("tc", self.tc),
                               kw.get("td", self.td))

    def check_invariants(self, tol=1e-10) -> None:
        for name in ("s", "tc", "td"):
            m = getattr(self, name)
            if m.size and (np.abs(m.sum(axis=1) - 1).max() > tol
                           or (m < 0).any() or (m > 1).any()):
                raise ValueError(f"{name} rows are not probability vectors")


@dataclass(frozen=True, eq=False)
class HardPartition:
    row_labels: np.ndarray
    ccol_labels: np.ndarray
    bcol_labels: np.ndarray

    def __post_init__(self):
        for name in ("row_labels", "ccol_labels", "bcol_labels"):
            object.__setattr__(self, name, _frozen(getattr(self, name), dtype=np.int64, ndim=1))

    def __eq__(self, other):
        if not isinstance(other, HardPartition):
            return NotImplemented
        return all(np.array_equal(getattr(self, k), getattr(other, k))
                   for k in ("row_labels", "ccol_labels", "bcol_labels"))


def _argmax_rows(m: np.ndarray) -> np.ndarray:
    # np.argmax returns the first maximal index, i.e. ties go to the lowest label
    if m.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    return np.argmax(m, axis=1)


def hard_assign(m: SoftMemberships) -> HardPartition:
    """Per-row argmax of every membership matrix, ties to the lowest index."""
    return HardPartition(_argmax_rows(m.s), _argmax_rows(m.tc), _argmax_rows(m.td))


@dataclass(frozen=True, eq=False)
class FitResult:
    params: ModelParams
    memberships: SoftMemberships
    partition: HardPartition
    fc_trace: tuple
    outer_iters: int
    converged: bool
    seed: int
    diagnostics: dict = field(default_factory=dict)

    @property
    def fc(self) -> float:
        return self.fc_trace[-1]
