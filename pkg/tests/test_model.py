"""Model math against naive loop oracles."""
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import logsumexp

from mlbm.core import ALPHA_EPS, VAR_FLOOR, MixedDataMatrix, ModelParams, SoftMemberships
from mlbm.errors import DimensionMismatch, EmptyCluster, InstanceTooLarge
from mlbm.model import (
    complete_log_likelihood,
    compute_fc,
    exact_log_likelihood,
    update_s,
    update_tc_td,
    update_theta,
)


def _lg(x, mu, s2):
    return -0.5 * math.log(2 * math.pi * s2) - (x - mu) ** 2 / (2 * s2)


def _lb(x, a):
    return math.log(a) if x else math.log(1 - a)


def instance(seed, n=6, d_c=4, d_d=5, g=3, m_c=2, m_d=2, shift=0.0):
    rng = np.random.default_rng(seed)
    x = MixedDataMatrix(rng.normal(shift, 1.0, size=(n, d_c)),
                        (rng.random((n, d_d)) < 0.4).astype(float))
    theta = ModelParams(rng.dirichlet(np.ones(g)),
                        rng.dirichlet(np.ones(m_c)) if m_c else np.zeros(0),
                        rng.dirichlet(np.ones(m_d)) if m_d else np.zeros(0),
                        rng.normal(shift, 1.0, size=(g, m_c)),
                        rng.uniform(0.3, 2.0, size=(g, m_c)),
                        rng.uniform(0.1, 0.9, size=(g, m_d)))
    mem = SoftMemberships(rng.dirichlet(np.ones(g), size=n),
                          rng.dirichlet(np.ones(max(m_c, 1)), size=d_c)[:, :m_c],
                          rng.dirichlet(np.ones(max(m_d, 1)), size=d_d)[:, :m_d])
    return x, mem, theta


def naive_fc(x, mem, th):
    s, tc, td = mem.s, mem.tc, mem.td
    total = 0.0
    for i in range(x.n):
        for k in range(th.pi.size):
            total += s[i, k] * math.log(th.pi[k])
            if s[i, k] > 0:
                total -= s[i, k] * math.log(s[i, k])
    for t, rho in ((tc, th.rho_c), (td, th.rho_d)):
        for j in range(t.shape[0]):
            for l in range(t.shape[1]):
                total += t[j, l] * math.log(rho[l])
                if t[j, l] > 0:
                    total -= t[j, l] * math.log(t[j, l])
    for i, j, k in itertools.product(range(x.n), range(x.d_c), range(th.pi.size)):
        for l in range(th.rho_c.size):
            total += s[i, k] * tc[j, l] * _lg(x.continuous[i, j], th.mu[k, l], th.sigma2[k, l])
    for i, j, k in itertools.product(range(x.n), range(x.d_d), range(th.pi.size)):
        for l in range(th.rho_d.size):
            total += s[i, k] * td[j, l] * _lb(x.binary[i, j], th.alpha[k, l])
    return total


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("dims", [dict(), dict(d_d=0, m_d=0), dict(d_c=0, m_c=0),
                                  dict(g=1, m_c=1, m_d=1)])
def test_fc_matches_loop_oracle(seed, dims):
    x, mem, th = instance(seed, **dims)
    assert compute_fc(x, mem, th) == pytest.approx(naive_fc(x, mem, th), rel=1e-12, abs=1e-10)


def test_fc_is_shift_invariant():
    # shifting data and means together leaves every Gaussian term unchanged
    x, mem, th = instance(3)
    for shift in (1e3, -1e4):
        x2 = MixedDataMatrix(x.continuous + shift, x.binary)
        th2 = ModelParams(th.pi, th.rho_c, th.rho_d, th.mu + shift, th.sigma2, th.alpha)
        assert compute_fc(x2, mem, th2) == pytest.approx(compute_fc(x, mem, th), rel=1e-9)


def test_fc_permutation_equivariance():
    x, mem, th = instance(4)
    rng = np.random.default_rng(0)
    rows, cc, bc = rng.permutation(x.n), rng.permutation(x.d_c), rng.permutation(x.d_d)
    xp = MixedDataMatrix(x.continuous[np.ix_(rows, cc)], x.binary[np.ix_(rows, bc)])
    mp = SoftMemberships(mem.s[rows], mem.tc[cc], mem.td[bc])
    assert compute_fc(xp, mp, th) == pytest.approx(compute_fc(x, mem, th), rel=1e-12)
    # relabelling clusters consistently in memberships and parameters
    k, lc, ld = [2, 0, 1], [1, 0], [1, 0]
    mk = SoftMemberships(mem.s[:, k], mem.tc[:, lc], mem.td[:, ld])
    assert compute_fc(x, mk, th.permuted(k, lc, ld)) == pytest.approx(
        compute_fc(x, mem, th), rel=1e-12)


def test_fc_rejects_mismatched_shapes():
    x, mem, th = instance(0)
    with pytest.raises(DimensionMismatch):
        compute_fc(x, mem.replace(s=mem.s[:-1]), th)
    _, mem2, _ = instance(0, g=2)
    with pytest.raises(DimensionMismatch):
        compute_fc(x, mem2, th)


@pytest.mark.parametrize("seed", range(4))
def test_update_s_matches_loop_oracle(seed):
    x, mem, th = instance(seed)
    got = update_s(x, mem, th)
    for i in range(x.n):
        logits = []
        for k in range(th.pi.size):
            v = math.log(th.pi[k])
            for j, l in itertools.product(range(x.d_c), range(th.rho_c.size)):
                v += mem.tc[j, l] * _lg(x.continuous[i, j], th.mu[k, l], th.sigma2[k, l])
            for j, l in itertools.product(range(x.d_d), range(th.rho_d.size)):
                v += mem.td[j, l] * _lb(x.binary[i, j], th.alpha[k, l])
            logits.append(v)
        want = np.exp(np.array(logits) - logsumexp(logits))
        np.testing.assert_allclose(got[i], want, rtol=1e-10, atol=1e-14)


@pytest.mark.parametrize("seed", range(4))
def test_update_columns_match_loop_oracle(seed):
    x, mem, th = instance(seed)
    tc, td = update_tc_td(x, mem.s, th)
    for j in range(x.d_c):
        logits = [math.log(th.rho_c[l]) + sum(
            mem.s[i, k] * _lg(x.continuous[i, j], th.mu[k, l], th.sigma2[k, l])
            for i in range(x.n) for k in range(th.pi.size)) for l in range(th.rho_c.size)]
        np.testing.assert_allclose(tc[j], np.exp(np.array(logits) - logsumexp(logits)),
                                   rtol=1e-10, atol=1e-14)
    for j in range(x.d_d):
        logits = [math.log(th.rho_d[l]) + sum(
            mem.s[i, k] * _lb(x.binary[i, j], th.alpha[k, l])
            for i in range(x.n) for k in range(th.pi.size)) for l in range(th.rho_d.size)]
        np.testing.assert_allclose(td[j], np.exp(np.array(logits) - logsumexp(logits)),
                                   rtol=1e-10, atol=1e-14)


def test_column_update_without_a_type():
    x, mem, th = instance(1, d_d=0, m_d=0)
    tc, td = update_tc_td(x, mem.s, th)
    assert td.shape == (0, 0)
    assert tc.shape == (x.d_c, 2)
    with pytest.raises(DimensionMismatch):
        update_tc_td(x, mem.s[:, :2], th)


@pytest.mark.parametrize("seed", range(4))
def test_update_theta_matches_weighted_moments(seed):
    x, mem, _ = instance(seed, shift=50.0)
    th = update_theta(x, mem)
    s, tc, td = mem.s, mem.tc, mem.td
    np.testing.assert_allclose(th.pi, s.mean(axis=0))
    np.testing.assert_allclose(th.rho_c, tc.mean(axis=0))
    np.testing.assert_allclose(th.rho_d, td.mean(axis=0))
    for k, l in itertools.product(range(th.pi.size), range(th.rho_c.size)):
        w = np.outer(s[:, k], tc[:, l])
        mu = (w * x.continuous).sum() / w.sum()
        var = (w * (x.continuous - mu) ** 2).sum() / w.sum()
        assert th.mu[k, l] == pytest.approx(mu, rel=1e-12)
        assert th.sigma2[k, l] == pytest.approx(var, rel=1e-8)
    for k, l in itertools.product(range(th.pi.size), range(th.rho_d.size)):
        w = np.outer(s[:, k], td[:, l])
        assert th.alpha[k, l] == pytest.approx((w * x.binary).sum() / w.sum(), rel=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_each_update_does_not_decrease_fc(seed):
    x, mem, th = instance(seed)
    th = update_theta(x, mem)
    base = compute_fc(x, mem, th)
    m1 = mem.replace(s=update_s(x, mem, th))
    f1 = compute_fc(x, m1, th)
    th1 = update_theta(x, m1)
    f2 = compute_fc(x, m1, th1)
    tc, td = update_tc_td(x, m1.s, th1)
    m2 = m1.replace(tc=tc, td=td)
    f3 = compute_fc(x, m2, th1)
    assert base <= f1 + 1e-10 and f1 <= f2 + 1e-10 and f2 <= f3 + 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.floats(-0.2, 0.2), st.integers(0, 2))
def test_updates_are_coordinate_maxima(seed, eps, which):
    """Perturbing an updated block (within its constraint set) never raises F_c."""
    x, mem, th = instance(seed % 1000)
    rng = np.random.default_rng(seed)
    if which == 0:
        s = update_s(x, mem, th)
        noise = rng.dirichlet(np.ones(s.shape[1]), size=s.shape[0])
        alt = (1 - abs(eps)) * s + abs(eps) * noise
        assert compute_fc(x, mem.replace(s=alt), th) <= compute_fc(x, mem.replace(s=s), th) + 1e-9
    elif which == 1:
        tc, td = update_tc_td(x, mem.s, th)
        alt = (1 - abs(eps)) * tc + abs(eps) * rng.dirichlet(np.ones(tc.shape[1]), size=tc.shape[0])
        assert (compute_fc(x, mem.replace(tc=alt, td=td), th)
                <= compute_fc(x, mem.replace(tc=tc, td=td), th) + 1e-9)
    else:
        opt = update_theta(x, mem)
        alt = ModelParams(opt.pi, opt.rho_c, opt.rho_d, opt.mu + eps,
                          opt.sigma2 * (1 + eps), np.clip(opt.alpha + eps / 2, 0.01, 0.99))
        assert compute_fc(x, mem, alt) <= compute_fc(x, mem, opt) + 1e-9


def test_floors_and_clipping():
    n = 4
    x = MixedDataMatrix(np.full((n, 2), 3.0), np.zeros((n, 2)))
    mem = SoftMemberships(np.ones((n, 1)), np.ones((2, 1)), np.ones((2, 1)))
    th = update_theta(x, mem)
    assert th.sigma2[0, 0] == VAR_FLOOR
    assert th.mu[0, 0] == pytest.approx(3.0)
    assert th.alpha[0, 0] == ALPHA_EPS
    x1 = MixedDataMatrix(np.full((n, 2), 3.0), np.ones((n, 2)))
    assert update_theta(x1, mem).alpha[0, 0] == 1 - ALPHA_EPS


def test_empty_cluster_raises():
    x, mem, _ = instance(0)
    s = mem.s.copy()
    s[:, 0] = 0
    s /= s.sum(axis=1, keepdims=True)
    with pytest.raises(EmptyCluster) as info:
        update_theta(x, mem.replace(s=s))
    assert (info.value.kind, info.value.index) == ("row", 0)


def test_complete_log_likelihood_matches_loops():
    x, _, th = instance(2)
    rng = np.random.default_rng(1)
    z, wc, wd = rng.integers(3, size=x.n), rng.integers(2, size=x.d_c), rng.integers(2, size=x.d_d)
    want = sum(math.log(th.pi[k]) for k in z)
    want += sum(math.log(th.rho_c[l]) for l in wc) + sum(math.log(th.rho_d[l]) for l in wd)
    for i in range(x.n):
        for j in range(x.d_c):
            want += _lg(x.continuous[i, j], th.mu[z[i], wc[j]], th.sigma2[z[i], wc[j]])
        for j in range(x.d_d):
            want += _lb(x.binary[i, j], th.alpha[z[i], wd[j]])
    assert complete_log_likelihood(x, z, wc, wd, th) == pytest.approx(want, rel=1e-12)


def _brute_log_likelihood(x, th):
    g, m_c, m_d = th.pi.size, th.rho_c.size, th.rho_d.size
    terms = [complete_log_likelihood(x, z, wc, wd, th)
             for z in itertools.product(range(g), repeat=x.n)
             for wc in itertools.product(range(m_c), repeat=x.d_c)
             for wd in itertools.product(range(m_d), repeat=x.d_d)]
    return logsumexp(terms)


@pytest.mark.parametrize("seed", range(6))
def test_exact_log_likelihood_matches_brute_force(seed):
    dims = [dict(n=3, d_c=2, d_d=2, g=2, m_c=2, m_d=2), dict(n=4, d_c=3, d_d=0, g=2, m_c=2, m_d=0),
            dict(n=2, d_c=0, d_d=3, g=2, m_c=0, m_d=2)][seed % 3]
    x, _, th = instance(seed, **dims)
    assert exact_log_likelihood(x, th) == pytest.approx(_brute_log_likelihood(x, th), rel=1e-12)


def test_exact_log_likelihood_single_block_is_independent_sum():
    x, _, th = instance(0, g=1, m_c=1, m_d=1)
    want = sum(_lg(v, th.mu[0, 0], th.sigma2[0, 0]) for v in x.continuous.ravel())
    want += sum(_lb(v, th.alpha[0, 0]) for v in x.binary.ravel())
    assert exact_log_likelihood(x, th) == pytest.approx(want, rel=1e-12)
    mem = SoftMemberships(np.ones((x.n, 1)), np.ones((x.d_c, 1)), np.ones((x.d_d, 1)))
    assert compute_fc(x, mem, th) == pytest.approx(want, rel=1e-12)


def test_exact_log_likelihood_refuses_large_instances():
    x, _, th = instance(0, n=20, d_c=10, d_d=10)
    with pytest.raises(InstanceTooLarge):
        exact_log_likelihood(x, th)
