"""Ground truth for testing: exact enumeration and closed-form posteriors.

:class:`DiscretizedBase` is the enumeration representation with each uniform
draw replaced by ``c`` equally weighted cell midpoints. Any model whose
behaviour is constant on every cell then has an exactly computable meaning,
so transformations built on top of it (populations, suspensions, traces,
SMC, MH kernels) can be compared against enumeration to rounding error.

The statistical half summarises weighted samples and provides the
conjugate and Kalman closed forms used as reference values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Sequence

import numpy as np
from scipy import stats

from .core import Representation, Weighted
from .discrete import EnumRep, MassFn
from .values import check_equality_safe

__all__ = [
    "DiscretizedBase",
    "exact_meaning",
    "exact_transition",
    "SummaryStats",
    "summarize",
    "batch_means_se",
    "beta_bernoulli_posterior",
    "normal_normal_posterior",
    "LinearGaussian",
    "kalman_filter",
    "z_test",
    "ks_test",
]


class DiscretizedBase(EnumRep):
    """Enumeration where a uniform draw is the ``c`` midpoints ``(j + 1/2)/c``, each of weight ``1/c``."""

    def __init__(self, cells: int):
        if cells < 1:
            raise ValueError("cells must be a positive integer")
        self.cells = cells
        w = 1.0 / cells
        self._draw = [(w, (j + 0.5) / cells) for j in range(cells)]

    def sample(self):
        return [Weighted(w, r) for w, r in self._draw]

    def __repr__(self) -> str:
        return f"DiscretizedBase({self.cells})"


def exact_meaning(rep: Representation, a) -> MassFn:
    """Meaning of ``a`` through every layer of ``rep``, checking that payloads can be compared."""
    m = rep.meaning(a)
    for x in m:
        check_equality_safe(x)
    return m


def exact_transition(rep: Representation, step: Callable[[Any], Any], states: Iterable) -> dict:
    """Transition kernel ``K[x][y]``: the meaning of ``step(ret(x))`` at ``y``, for each state ``x``."""
    return {x: dict(exact_meaning(rep, step(rep.ret(x)))) for x in states}


# --- summaries of weighted samples -----------------------------------------


@dataclass(frozen=True)
class SummaryStats:
    weighted_mean: float
    weighted_variance: float
    total_weight: float
    effective_sample_size: float
    std_error: float

    def as_dict(self) -> dict:
        return {
            "weighted_mean": self.weighted_mean,
            "weighted_variance": self.weighted_variance,
            "total_weight": self.total_weight,
            "ess": self.effective_sample_size,
            "std_error": self.std_error,
        }


def summarize(weights: Sequence[float], values: Sequence[float]) -> SummaryStats:
    """Self-normalised mean and variance, Kish effective sample size and ``sqrt(var / ess)``.

    A zero total weight gives NaN for every statistic except the total and ESS (0).
    """
    w = np.asarray(weights, dtype=float)
    x = np.asarray(values, dtype=float)
    if w.shape != x.shape or w.ndim != 1:
        raise ValueError("weights and values must be 1-d and the same length")
    total = float(w.sum())
    if total == 0.0:
        nan = math.nan
        return SummaryStats(nan, nan, 0.0, 0.0, nan)
    p = w / total
    mean = float(p @ x)
    var = float(p @ (x - mean) ** 2)
    ess = total * total / float(w @ w)
    return SummaryStats(mean, var, total, ess, math.sqrt(var / ess))


def batch_means_se(xs: Sequence[float], batches: int | None = None) -> float:
    """Standard error of the mean of a correlated chain by non-overlapping batch means."""
    x = np.asarray(xs, dtype=float)
    n = len(x)
    b = batches or int(math.sqrt(n))
    if b < 2 or n < 2 * b:
        raise ValueError("need at least two batches of two draws")
    size = n // b
    means = x[: b * size].reshape(b, size).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(b))


# --- closed forms -----------------------------------------------------------


def beta_bernoulli_posterior(heads: int, trials: int) -> tuple[float, float]:
    """Mean and variance of ``Beta(heads + 1, trials - heads + 1)``."""
    if not 0 <= heads <= trials:
        raise ValueError("need 0 <= heads <= trials")
    a, b = heads + 1.0, trials - heads + 1.0
    return a / (a + b), a * b / ((a + b) ** 2 * (a + b + 1.0))


def normal_normal_posterior(mu0: float, sigma0: float, sigma: float, ys: Sequence[float]) -> tuple[float, float]:
    """Posterior of the mean of ``N(mu, sigma^2)`` observations under a ``N(mu0, sigma0^2)`` prior."""
    if sigma0 <= 0 or sigma <= 0:
        raise ValueError("standard deviations must be positive")
    precision = 1.0 / sigma0**2 + len(ys) / sigma**2
    mean = (mu0 / sigma0**2 + math.fsum(ys) / sigma**2) / precision
    return mean, 1.0 / precision


@dataclass(frozen=True)
class LinearGaussian:
    """``x1 ~ N(m0, p0)``, ``x_t = a x_{t-1} + N(0, q)``, ``y_t ~ N(x_t, r)`` (variances, not sds)."""

    a: float
    q: float
    r: float
    m0: float = 0.0
    p0: float = 1.0

    def __post_init__(self):
        if self.q < 0 or self.r < 0 or self.p0 < 0:
            raise ValueError("variances must be nonnegative")


def kalman_filter(params: LinearGaussian, ys: Sequence[float]) -> list[tuple[float, float]]:
    """Filtered ``(mean, variance)`` of ``x_t`` given ``y_1..y_t``, for each step."""
    m, p = params.m0, params.p0
    out = []
    for t, y in enumerate(ys):
        if t:
            m, p = params.a * m, params.a**2 * p + params.q
        s = p + params.r
        if s <= 0:
            raise ValueError("degenerate system: zero predictive variance")
        gain = p / s
        m, p = m + gain * (y - m), (1.0 - gain) * p
        out.append((m, p))
    return out


# --- tests ------------------------------------------------------------------


def z_test(estimate: float, oracle: float, se: float, k_sigma: float) -> bool:
    if not se > 0:
        raise ValueError("standard error must be positive")
    return abs(estimate - oracle) <= k_sigma * se


def ks_test(samples: Sequence[float], cdf: Callable[[Any], Any]) -> float:
    """Kolmogorov-Smirnov distance between the empirical CDF of ``samples`` and ``cdf``."""
    if len(samples) == 0:
        raise ValueError("need at least one sample")
    return float(stats.kstest(np.asarray(samples, dtype=float), cdf).statistic)
