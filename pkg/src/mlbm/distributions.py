"""Log-density kernels for Gaussian and Bernoulli blocks.

Scalar and elementwise (numpy broadcasting) inputs are both accepted.
"""
from dataclasses import dataclass

import numpy as np

from .core import ALPHA_EPS, VAR_FLOOR

LOG_2PI = np.log(2 * np.pi)


@dataclass(frozen=True)
class GaussianBlockParam:
    mu: float
    sigma2: float

    def __post_init__(self):
        if not self.sigma2 >= VAR_FLOOR:
            raise ValueError(f"sigma2={self.sigma2} is below VAR_FLOOR")


@dataclass(frozen=True)
class BernoulliBlockParam:
    alpha: float

    def __post_init__(self):
        if not ALPHA_EPS <= self.alpha <= 1 - ALPHA_EPS:
            raise ValueError(f"alpha={self.alpha} is outside [ALPHA_EPS, 1-ALPHA_EPS]")


def gaussian_log_pdf(x, p: GaussianBlockParam):
    return gaussian_logpdf(x, p.mu, p.sigma2)


def bernoulli_log_pmf(x, p: BernoulliBlockParam):
    return bernoulli_logpmf(x, p.alpha)


def gaussian_logpdf(x, mu, sigma2):
    """``-0.5 log(2 pi sigma2) - (x - mu)^2 / (2 sigma2)``, elementwise."""
    x, mu, sigma2 = np.asarray(x, float), np.asarray(mu, float), np.asarray(sigma2, float)
    return -0.5 * (LOG_2PI + np.log(sigma2)) - (x - mu) ** 2 / (2 * sigma2)


def bernoulli_logpmf(x, alpha):
    x, alpha = np.asarray(x, float), np.asarray(alpha, float)
    return x * np.log(alpha) + (1 - x) * np.log1p(-alpha)
