"""Standalone continuous-only Gaussian LBM used as an independent reference.

Written with explicit per-cell log-density tensors and two-pass moments, so
it shares no numerical code with the package.  The random draws and the
driver loop follow the same protocol as the package's VEM driver, so equal
seeds give equal trajectories.
"""
import math

import numpy as np

LOG_2PI = math.log(2 * math.pi)
VAR_FLOOR = 1e-8


class Empty(Exception):
    pass


def _onehot_init(rng, rows, k):
    if k == 1:
        return np.ones((rows, 1))
    for _ in range(1000):
        labels = rng.integers(k, size=rows)
        if len(set(labels.tolist())) == k:
            m = np.zeros((rows, k))
            m[np.arange(rows), labels] = 1.0
            return m
    raise RuntimeError("init failed")


def cell_logpdf(x, mu, s2):
    """``n x d x g x m`` tensor of log N(x_ij; mu_kl, s2_kl)."""
    diff = x[:, :, None, None] - mu[None, None, :, :]
    return -0.5 * (LOG_2PI + np.log(s2))[None, None] - diff**2 / (2 * s2[None, None])


def _softmax(a):
    a = a - a.max(axis=1, keepdims=True)
    e = np.exp(a)
    return e / e.sum(axis=1, keepdims=True)


def m_step(x, s, t):
    sk, tl = s.sum(axis=0), t.sum(axis=0)
    if (sk < 1e-12).any() or (tl < 1e-12).any():
        raise Empty()
    n, d = x.shape
    w = np.einsum("ik,jl->kl", s, t)
    mu = np.einsum("ik,jl,ij->kl", s, t, x) / w
    dev = (x[:, :, None, None] - mu[None, None]) ** 2
    s2 = np.einsum("ik,jl,ijkl->kl", s, t, dev) / w
    return sk / n, tl / d, mu, np.maximum(s2, VAR_FLOOR)


def criterion(x, s, t, pi, rho, mu, s2):
    def ent(m):
        nz = m[m > 0]
        return -float((nz * np.log(nz)).sum())

    ll = np.einsum("ik,jl,ijkl->", s, t, cell_logpdf(x, mu, s2))
    return (float(s.sum(axis=0) @ np.log(pi)) + float(t.sum(axis=0) @ np.log(rho))
            + float(ll) + ent(s) + ent(t))


def update_rows(x, t, pi, mu, s2):
    return _softmax(np.log(pi) + np.einsum("jl,ijkl->ik", t, cell_logpdf(x, mu, s2)))


def update_cols(x, s, rho, mu, s2):
    return _softmax(np.log(rho) + np.einsum("ik,ijkl->jl", s, cell_logpdf(x, mu, s2)))


def _stable(new, old, eps):
    return abs(new - old) <= eps * (1 + abs(new))


def fit_once(x, g, m, rng, cfg):
    s = _onehot_init(rng, x.shape[0], g)
    t = _onehot_init(rng, x.shape[1], m)
    theta = m_step(x, s, t)
    fc = criterion(x, s, t, *theta)
    trace = []
    for outer in range(1, cfg.max_outer + 1):
        warm = outer <= cfg.warmup_steps
        lam = cfg.warmup_damping if warm else 1.0
        steps = 1 if warm else cfg.max_inner
        start = fc
        for side in ("rows", "cols"):
            for _ in range(steps):
                pi, rho, mu, s2 = theta
                if side == "rows":
                    s = (1 - lam) * s + lam * update_rows(x, t, pi, mu, s2)
                else:
                    t = (1 - lam) * t + lam * update_cols(x, s, rho, mu, s2)
                theta = m_step(x, s, t)
                new = criterion(x, s, t, *theta)
                done = not warm and _stable(new, fc, cfg.eps_inner)
                fc = new
                if done:
                    break
        trace.append(fc)
        if not warm and outer >= cfg.min_outer and _stable(fc, start, cfg.eps_outer):
            break
    return fc, trace, s, t


def fit(x, g, m, cfg):
    """Best final criterion over ``cfg.n_restarts`` restarts (failed restarts skipped)."""
    seeds = np.random.SeedSequence(cfg.seed).generate_state(cfg.n_restarts)
    best = None
    for sub in seeds:
        try:
            out = fit_once(x, g, m, np.random.default_rng(int(sub)), cfg)
        except Empty:
            continue
        if best is None or out[0] > best[0]:
            best = out
    return best
