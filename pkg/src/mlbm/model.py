"""Variational criterion and coordinate updates of the mixed latent block model.

Notation follows the usual latent block model conventions: ``s`` holds row
memberships, ``tc``/``td`` continuous and binary column memberships, and
``ModelParams`` the proportions and block parameters.  Every quantity is
computed in log space; proportional updates are normalised with a row-wise
softmax.

The per-cell log-densities are never materialised.  Gaussian terms are
expanded into first and second moments of the (globally shifted) data, so
each update costs a handful of matrix products.
"""
from __future__ import annotations

import itertools

import numpy as np
from scipy.special import logsumexp, softmax, xlogy

from .core import (
    ALPHA_EPS,
    VAR_FLOOR,
    MixedDataMatrix,
    ModelParams,
    ModelSpec,
    SoftMemberships,
)
from .distributions import LOG_2PI, bernoulli_logpmf, gaussian_logpdf
from .errors import DimensionMismatch, EmptyCluster, InstanceTooLarge

#: Clusters with less total membership mass than this are considered empty.
EMPTY_MASS = 1e-12
#: Largest number of joint assignments exact_log_likelihood will enumerate.
MAX_ENUMERATION = 10**7


def _check(x: MixedDataMatrix, m: SoftMemberships | None = None,
           theta: ModelParams | None = None) -> None:
    if m is not None:
        if m.s.shape[0] != x.n or m.tc.shape[0] != x.d_c or m.td.shape[0] != x.d_d:
            raise DimensionMismatch(
                f"memberships of shape {m.s.shape}, {m.tc.shape}, {m.td.shape} "
                f"do not match data {x.shape}"
            )
    if theta is not None:
        if theta.rho_c.size and x.d_c == 0 or theta.rho_d.size and x.d_d == 0:
            raise DimensionMismatch("parameters describe a column type absent from the data")
    if m is not None and theta is not None and m.spec != theta.spec:
        raise DimensionMismatch(f"memberships {m.spec} vs parameters {theta.spec}")


def _gauss_coeffs(x: MixedDataMatrix, theta: ModelParams):
    """Coefficients of ``log phi = a * xs^2 + b * xs + c`` for shifted data ``xs``."""
    inv = 1.0 / theta.sigma2
    mus = theta.mu - x.shift
    a = -0.5 * inv
    b = mus * inv
    c = -0.5 * (LOG_2PI + np.log(theta.sigma2)) - 0.5 * mus**2 * inv
    return a, b, c


def _bern_coeffs(theta: ModelParams):
    log1m = np.log1p(-theta.alpha)
    return np.log(theta.alpha) - log1m, log1m


def row_log_terms(x: MixedDataMatrix, tc, td, theta: ModelParams) -> np.ndarray:
    """``n x g`` matrix of sum_{j,l} t_jl log phi_kl(x_ij) over both column types."""
    out = np.zeros((x.n, theta.pi.size))
    if x.d_c:
        a, b, c = _gauss_coeffs(x, theta)
        s1 = x.centered @ tc
        s2 = x.centered_sq @ tc
        out += s2 @ a.T + s1 @ b.T + c @ tc.sum(axis=0)
    if x.d_d:
        logit, log1m = _bern_coeffs(theta)
        out += (x.binary @ td) @ logit.T + log1m @ td.sum(axis=0)
    return out


def ccol_log_terms(x: MixedDataMatrix, s, theta: ModelParams) -> np.ndarray:
    """``d_c x m_c`` matrix of sum_{i,k} s_ik log phi_kl(x_ij)."""
    a, b, c = _gauss_coeffs(x, theta)
    r1 = s.T @ x.centered
    r2 = s.T @ x.centered_sq
    return r2.T @ a + r1.T @ b + s.sum(axis=0) @ c


def bcol_log_terms(x: MixedDataMatrix, s, theta: ModelParams) -> np.ndarray:
    """``d_d x m_d`` matrix of sum_{i,k} s_ik log phi_kl(x_ij)."""
    logit, log1m = _bern_coeffs(theta)
    return (s.T @ x.binary).T @ logit + s.sum(axis=0) @ log1m


def _entropy(m) -> float:
    return -float(xlogy(m, m).sum())


def compute_fc(x: MixedDataMatrix, m: SoftMemberships, theta: ModelParams) -> float:
    """Variational lower bound F_c of the log-likelihood.

    Proportion terms plus expected block log-likelihoods plus the entropies of
    the three membership matrices (with ``0 log 0 = 0``).
    """
    _check(x, m, theta)
    fc = float(m.s.sum(axis=0) @ np.log(theta.pi))
    if x.d_c:
        fc += float(m.tc.sum(axis=0) @ np.log(theta.rho_c))
    if x.d_d:
        fc += float(m.td.sum(axis=0) @ np.log(theta.rho_d))
    fc += float((m.s * row_log_terms(x, m.tc, m.td, theta)).sum())
    return fc + _entropy(m.s) + _entropy(m.tc) + _entropy(m.td)


def complete_log_likelihood(x: MixedDataMatrix, z, wc, wd, theta: ModelParams) -> float:
    """Full-information log-likelihood for hard labels ``z``, ``wc``, ``wd``."""
    z, wc, wd = (np.asarray(v, dtype=np.int64) for v in (z, wc, wd))
    ll = float(np.log(theta.pi)[z].sum())
    if x.d_c:
        ll += float(np.log(theta.rho_c)[wc].sum())
        ll += float(gaussian_logpdf(x.continuous, theta.mu[np.ix_(z, wc)],
                                    theta.sigma2[np.ix_(z, wc)]).sum())
    if x.d_d:
        ll += float(np.log(theta.rho_d)[wd].sum())
        ll += float(bernoulli_logpmf(x.binary, theta.alpha[np.ix_(z, wd)]).sum())
    return ll


def update_s(x: MixedDataMatrix, m: SoftMemberships, theta: ModelParams) -> np.ndarray:
    """Optimal row memberships for fixed column memberships and parameters."""
    _check(x, m, theta)
    logits = np.log(theta.pi) + row_log_terms(x, m.tc, m.td, theta)
    return softmax(logits, axis=1)


def update_tc_td(x: MixedDataMatrix, s, theta: ModelParams):
    """Optimal continuous and binary column memberships for fixed ``s`` and parameters.

    The two updates do not interact, so they are computed independently.
    """
    s = np.asarray(s, dtype=float)
    if s.shape != (x.n, theta.pi.size):
        raise DimensionMismatch(f"s has shape {s.shape}, expected {(x.n, theta.pi.size)}")
    _check(x, None, theta)
    if x.d_c:
        tc = softmax(np.log(theta.rho_c) + ccol_log_terms(x, s, theta), axis=1)
    else:
        tc = np.zeros((0, theta.rho_c.size))
    if x.d_d:
        td = softmax(np.log(theta.rho_d) + bcol_log_terms(x, s, theta), axis=1)
    else:
        td = np.zeros((0, theta.rho_d.size))
    return tc, td


def _masses(kind, m):
    mass = m.sum(axis=0)
    low = np.flatnonzero(mass < EMPTY_MASS)
    if low.size:
        raise EmptyCluster(kind, int(low[0]), float(mass[low[0]]))
    return mass


def update_theta(x: MixedDataMatrix, m: SoftMemberships) -> ModelParams:
    """Maximise F_c over proportions and block parameters for fixed memberships.

    Means, variances and Bernoulli parameters are the membership-weighted block
    moments; the variance is taken around the freshly computed mean.  Floors
    (VAR_FLOOR, ALPHA_EPS) are applied last.  Raises :class:`EmptyCluster`
    when a cluster has no membership mass left.
    """
    _check(x, m)
    spec = m.spec
    ssum = _masses("row", m.s)
    pi = ssum / x.n
    g = spec.g
    if x.d_c:
        tsum = _masses("ccol", m.tc)
        rho_c = tsum / x.d_c
        w = np.outer(ssum, tsum)
        m1 = (m.s.T @ x.centered @ m.tc) / w
        m2 = (m.s.T @ x.centered_sq @ m.tc) / w
        mu = m1 + x.shift
        sigma2 = np.maximum(m2 - m1**2, VAR_FLOOR)
    else:
        rho_c = np.zeros(0)
        mu = sigma2 = np.zeros((g, 0))
    if x.d_d:
        tsum = _masses("bcol", m.td)
        rho_d = tsum / x.d_d
        alpha = (m.s.T @ x.binary @ m.td) / np.outer(ssum, tsum)
        alpha = np.clip(alpha, ALPHA_EPS, 1 - ALPHA_EPS)
    else:
        rho_d = np.zeros(0)
        alpha = np.zeros((g, 0))
    return ModelParams(pi, rho_c, rho_d, mu, sigma2, alpha)


def _all_labelings(size, k):
    if size == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.array(list(itertools.product(range(k), repeat=size)), dtype=np.int64)


def exact_log_likelihood(x: MixedDataMatrix, theta: ModelParams,
                         spec: ModelSpec | None = None) -> float:
    """Exact log-likelihood by enumerating every joint (z, wc, wd) assignment.

    Only usable on tiny instances: the number of assignments
    ``g**n * m_c**d_c * m_d**d_d`` must not exceed ``MAX_ENUMERATION``.
    """
    spec = spec or theta.spec
    spec.check(x)
    _check(x, None, theta)
    total = spec.g**x.n * spec.m_c**x.d_c * spec.m_d**x.d_d
    if total > MAX_ENUMERATION:
        raise InstanceTooLarge(f"{total} joint assignments exceed {MAX_ENUMERATION}")

    wcs = _all_labelings(x.d_c, spec.m_c)
    wds = _all_labelings(x.d_d, spec.m_d)
    log_pi = np.log(theta.pi)
    terms = []
    for z in itertools.product(range(spec.g), repeat=x.n):
        z = np.asarray(z, dtype=np.int64)
        # log p(w) + log p(x | z, w) for every column labelling of each type
        cont = np.zeros(len(wcs))
        if x.d_c:
            cell = gaussian_logpdf(x.continuous[:, :, None], theta.mu[z][:, None, :],
                                   theta.sigma2[z][:, None, :]).sum(axis=0)  # d_c x m_c
            cols = np.arange(x.d_c)
            cont = (cell[cols, wcs] + np.log(theta.rho_c)[wcs]).sum(axis=1)
        binr = np.zeros(len(wds))
        if x.d_d:
            cell = bernoulli_logpmf(x.binary[:, :, None], theta.alpha[z][:, None, :]).sum(axis=0)
            cols = np.arange(x.d_d)
            binr = (cell[cols, wds] + np.log(theta.rho_d)[wds]).sum(axis=1)
        joint = log_pi[z].sum() + cont[:, None] + binr[None, :]
        terms.append(logsumexp(joint))
    return float(logsumexp(terms))
