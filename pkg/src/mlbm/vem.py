"""Variational EM driver: alternating row and column inner loops with restarts.

One outer iteration runs two inner loops.  Loop A alternates row-membership
updates with parameter re-estimation until the criterion stabilises; loop B
does the same for the column memberships.  The first ``warmup_steps`` outer
iterations take small steps instead: a single (optionally damped) update per
inner loop and no convergence test, so rows and columns co-evolve before any
side is allowed to settle.  Together with concentrated random starts this is
what gets the optimiser out of the one-cluster basin on symmetric designs.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import FitResult, MixedDataMatrix, ModelSpec, SoftMemberships, hard_assign, validate
from .errors import AllRestartsFailed, EmptyCluster, InitFailure, NonFiniteCriterion
from .model import compute_fc, update_s, update_tc_td, update_theta

logger = logging.getLogger(__name__)

INIT_ATTEMPTS = 1000


@dataclass(frozen=True)
class VemConfig:
    max_outer: int = 100
    max_inner: int = 50
    eps_inner: float = 1e-5
    eps_outer: float = 1e-10
    min_outer: int = 10
    warmup_steps: int = 5
    warmup_damping: float = 1.0
    n_restarts: int = 10
    seed: int = 0
    #: None draws one-hot random memberships; a float draws Dirichlet rows.
    init_concentration: float | None = None

    def __post_init__(self):
        if not self.eps_inner > self.eps_outer > 0:
            raise ValueError("need eps_inner > eps_outer > 0")
        if not 0 < self.warmup_damping <= 1:
            raise ValueError("warmup_damping must lie in (0, 1]")
        if self.n_restarts < 1:
            raise ValueError("n_restarts must be >= 1")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration caps must be >= 1")
        if self.min_outer < 0 or self.warmup_steps < 0:
            raise ValueError("min_outer and warmup_steps must be >= 0")
        if self.init_concentration is not None and not self.init_concentration > 0:
            raise ValueError("init_concentration must be positive")


def _random_simplex_rows(rng, rows, k, concentration):
    if rows == 0:
        return np.zeros((0, k))
    if k == 1:
        return np.ones((rows, 1))
    for _ in range(INIT_ATTEMPTS):
        if concentration is None:
            m = np.eye(k)[rng.integers(k, size=rows)]
        else:
            m = rng.dirichlet(np.full(k, float(concentration)), size=rows)
        if np.unique(np.argmax(m, axis=1)).size == k:
            return m
    raise InitFailure(
        f"could not give each of {k} clusters an argmax row among {rows} rows "
        f"after {INIT_ATTEMPTS} attempts"
    )


def init_memberships(x: MixedDataMatrix, spec: ModelSpec, rng,
                     concentration: float | None = None) -> SoftMemberships:
    """Random memberships in which every cluster is the argmax of some row.

    Rows are random vertices of the simplex (a random hard partition) unless a
    Dirichlet ``concentration`` is given.  Draw order is fixed: rows, then
    continuous columns, then binary columns.
    """
    spec.check(x)
    return SoftMemberships(
        _random_simplex_rows(rng, x.n, spec.g, concentration),
        _random_simplex_rows(rng, x.d_c, spec.m_c, concentration),
        _random_simplex_rows(rng, x.d_d, spec.m_d, concentration),
    )


def _stable(new, old, eps):
    return abs(new - old) <= eps * (1 + abs(new))


def _criterion(x, m, theta):
    fc = compute_fc(x, m, theta)
    if not math.isfinite(fc):
        raise NonFiniteCriterion(f"F_c became {fc}")
    return fc


def fit_once(x: MixedDataMatrix, spec: ModelSpec, cfg: VemConfig, rng,
             init: SoftMemberships | None = None, verbose: bool = False,
             seed: int | None = None) -> FitResult:
    """Run a single VEM optimisation from a random (or given) initialisation.

    ``EmptyCluster`` is propagated to the caller, which owns the restart policy.
    With ``verbose`` the per-step inner-loop criterion values are kept in
    ``diagnostics["inner_trace"]``.
    """
    spec.check(x)
    m = init if init is not None else init_memberships(x, spec, rng, cfg.init_concentration)
    theta = update_theta(x, m)
    fc = _criterion(x, m, theta)
    trace, inner_trace = [], []
    converged = False
    outer = 0

    for outer in range(1, cfg.max_outer + 1):
        warm = outer <= cfg.warmup_steps
        lam = cfg.warmup_damping if warm else 1.0
        steps = 1 if warm else cfg.max_inner
        fc_start = fc

        for side in ("rows", "cols"):
            for _ in range(steps):
                if side == "rows":
                    s_hat = update_s(x, m, theta)
                    m = m.replace(s=s_hat if lam == 1.0 else (1 - lam) * m.s + lam * s_hat)
                else:
                    tc_hat, td_hat = update_tc_td(x, m.s, theta)
                    if lam != 1.0:
                        tc_hat = (1 - lam) * m.tc + lam * tc_hat
                        td_hat = (1 - lam) * m.td + lam * td_hat
                    m = m.replace(tc=tc_hat, td=td_hat)
                theta = update_theta(x, m)
                new = _criterion(x, m, theta)
                done = not warm and _stable(new, fc, cfg.eps_inner)
                fc = new
                if verbose:
                    inner_trace.append((outer, side, fc))
                if done:
                    break

        trace.append(fc)
        if (not warm and outer >= cfg.min_outer
                and _stable(fc, fc_start, cfg.eps_outer)):
            converged = True
            break

    logger.debug("fit_once: %d outer iterations, F_c=%.6f, converged=%s",
                 outer, fc, converged)
    diagnostics = {"inner_trace": inner_trace} if verbose else {}
    return FitResult(theta, m, hard_assign(m), tuple(trace), outer, converged,
                     seed, diagnostics)


def derive_seeds(seed: int, count: int) -> list[int]:
    """Independent sub-seeds, one per restart, derived from a master seed."""
    return [int(v) for v in np.random.SeedSequence(seed).generate_state(count)]


def fit(x: MixedDataMatrix, spec: ModelSpec, cfg: VemConfig = VemConfig(),
        n_jobs: int = 1) -> FitResult:
    """Best of ``cfg.n_restarts`` independent runs, ranked by final F_c.

    Restarts hitting an empty cluster count as failures.  The outcome only
    depends on ``cfg`` (ties resolve to the lowest restart index), not on
    ``n_jobs``.
    """
    validate(x)
    spec.check(x)
    seeds = derive_seeds(cfg.seed, cfg.n_restarts)

    def run(sub):
        try:
            return fit_once(x, spec, cfg, np.random.default_rng(sub), seed=sub)
        except EmptyCluster as exc:
            logger.info("restart with seed %d hit %s", sub, exc)
            return exc

    if n_jobs > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            outcomes = list(pool.map(run, seeds))
    else:
        outcomes = [run(s) for s in seeds]

    best, failures = None, []
    fcs = []
    for out in outcomes:
        if isinstance(out, Exception):
            failures.append(out)
            fcs.append(-math.inf)
            continue
        fcs.append(out.fc)
        if best is None or out.fc > best.fc:
            best = out
    if best is None:
        raise AllRestartsFailed(failures)
    diagnostics = dict(best.diagnostics, restart_fcs=fcs, n_failed=len(failures))
    return FitResult(best.params, best.memberships, best.partition, best.fc_trace,
                     best.outer_iters, best.converged, best.seed, diagnostics)


__all__ = ["VemConfig", "init_memberships", "fit_once", "fit", "derive_seeds", "InitFailure"]
