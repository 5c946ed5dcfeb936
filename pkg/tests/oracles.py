"""Independent oracles shared by the test suite.

Everything here is deliberately computed by a different route than the
library: closed-form reflection-principle probabilities, matrix-exponential
occupation laws, and scipy quadrature against conditional normal densities.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad
from scipy.linalg import expm
from scipy.stats import norm


def first_passage_prob_down(x0: float, L: float, sigma: float, T: float) -> float:
    """P(min X <= L by T) for dX = -sigma^2/2 dt + sigma dW, L < x0."""
    mu = -0.5 * sigma * sigma
    b = L - x0
    sd = sigma * math.sqrt(T)
    return (norm.cdf((b - mu * T) / sd)
            + math.exp(2.0 * mu * b / (sigma * sigma)) * norm.cdf((b + mu * T) / sd))


def first_passage_prob_up(x0: float, U: float, sigma: float, T: float) -> float:
    """P(max X >= U by T), U > x0."""
    mu = -0.5 * sigma * sigma
    b = U - x0
    sd = sigma * math.sqrt(T)
    return (norm.cdf((-b + mu * T) / sd)
            + math.exp(2.0 * mu * b / (sigma * sigma)) * norm.cdf((-b - mu * T) / sd))


def regime_expected_total_qv(states, generator, initial_state: int, T: float) -> float:
    """E int_0^T sigma^2 dt for a CTMC via the matrix exponential of the generator."""
    Q = np.asarray(generator, dtype=float)
    sig2 = np.asarray(states, dtype=float) ** 2

    def mean_rate(t):
        return float(expm(Q * t)[initial_state] @ sig2)

    val, _ = quad(mean_rate, 0.0, T, epsabs=1e-12, limit=200)
    return val


def conditional_normal_average(fn, center: float, v: float, breakpoints=(),
                               width: float = 12.0):
    """int fn(x) n(x; center - v/2, v) dx by scipy quadrature.

    fn takes a scalar x and returns a complex; splits panels at breakpoints.
    """
    mu, sd = center - 0.5 * v, math.sqrt(v)
    lo, hi = mu - width * sd, mu + width * sd
    pts = [b for b in breakpoints if lo < b < hi]

    def re(x):
        return float(np.real(fn(x))) * norm.pdf(x, mu, sd)

    def im(x):
        return float(np.imag(fn(x))) * norm.pdf(x, mu, sd)

    kw = dict(points=pts, limit=300, epsabs=1e-13, epsrel=1e-11)
    return complex(quad(re, lo, hi, **kw)[0], quad(im, lo, hi, **kw)[0])


def paired_z(diff: np.ndarray) -> float:
    """z-score of the mean of a paired (complex) difference sample."""
    se = math.sqrt((diff.real.var() + diff.imag.var()) / len(diff))
    return abs(complex(diff.mean())) / max(se, 1e-300)
