"""Registry of example models, written directly as sampler programs.

Each entry records whether the model is discrete (piecewise constant on a
grid of ``cells`` cells per draw, so enumeration is exact), how many scores
a run performs, and which kind of reference answer exists for it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable

from .core import normal_quantile
from .oracle import LinearGaussian
from .sampler import Bind, Pure, Sample, Score

__all__ = [
    "ModelInfo",
    "REGISTRY",
    "get_model",
    "list_models",
    "bernoulli",
    "normal",
    "normal_pdf",
    "sprinkler",
    "geometric_soft",
    "beta_bernoulli",
    "gaussian_mean",
    "lin_gauss_ssm",
    "BETA_BERNOULLI_DATA",
    "GAUSSIAN_MEAN_DATA",
    "SSM_PARAMS",
    "SSM_DATA",
]

_TINY = 2.0**-54  # stands in for a draw of exactly 0 in the normal quantile


def bernoulli(p: float):
    return Sample(lambda r: Pure(r < p))


def normal(mu: float, sd: float):
    return Sample(lambda r: Pure(mu + sd * normal_quantile(max(r, _TINY))))


def normal_pdf(x: float, mu: float, sd: float) -> float:
    z = (x - mu) / sd
    return math.exp(-0.5 * z * z) / (sd * math.sqrt(2.0 * math.pi))


# --- models -----------------------------------------------------------------

# P(wet | sprinkler, rain)
_WET = {(True, True): 0.99, (True, False): 0.9, (False, True): 0.8, (False, False): 0.0}


def sprinkler():
    """Did it rain, given the grass is wet?"""

    def given_rain(rain):
        spr = bernoulli(0.01 if rain else 0.4)
        return Bind(spr, lambda s: Score(_WET[(s, rain)], Pure(rain)))

    return Bind(bernoulli(0.2), given_rain)


def geometric_soft(cap: int = 10):
    """Count tails before the first head (at most ``cap``), softly penalising long runs."""

    def go(n):
        if n == cap:
            return Score(1.0 / (1 + n), Pure(n))
        return Bind(bernoulli(0.5), lambda head: Score(1.0 / (1 + n), Pure(n)) if head else go(n + 1))

    return go(0)


BETA_BERNOULLI_DATA = (True, True, False, True, True, False, True, False, True)  # 6 heads in 9


def beta_bernoulli(data=BETA_BERNOULLI_DATA):
    """Coin bias with a uniform prior, one score per observed toss."""

    def observe(theta, i):
        if i == len(data):
            return Pure(theta)
        return Score(theta if data[i] else 1.0 - theta, observe(theta, i + 1))

    return Sample(lambda theta: observe(theta, 0))


GAUSSIAN_MEAN_DATA = (0.8, 1.3, 0.2, 1.9, 1.1)


def gaussian_mean(ys=GAUSSIAN_MEAN_DATA, mu0: float = 0.0, sigma0: float = 1.0, sigma: float = 1.0):
    """Unknown mean with a normal prior and normal observations."""

    def observe(mu, i):
        if i == len(ys):
            return Pure(mu)
        return Score(normal_pdf(ys[i], mu, sigma), observe(mu, i + 1))

    return Bind(normal(mu0, sigma0), lambda mu: observe(mu, 0))


SSM_PARAMS = LinearGaussian(a=0.9, q=0.5, r=0.4, m0=0.0, p0=1.0)
SSM_DATA = (0.5, 1.1, 0.7)


def lin_gauss_ssm(ys=SSM_DATA, params: LinearGaussian = SSM_PARAMS):
    """Linear-Gaussian state-space model; returns the final state."""
    sd_q, sd_r = math.sqrt(params.q), math.sqrt(params.r)

    def step(x, t):
        obs = Score(normal_pdf(ys[t], x, sd_r), Pure(x))
        if t + 1 == len(ys):
            return obs
        return Bind(obs, lambda x: Bind(normal(params.a * x, sd_q), lambda x2: step(x2, t + 1)))

    return Bind(normal(params.m0, math.sqrt(params.p0)), lambda x: step(x, 0))


# --- registry ---------------------------------------------------------------


@dataclass(frozen=True)
class ModelInfo:
    name: str
    build: Callable[[], Any]
    discrete: bool
    score_count: int
    oracle: str  # "enumeration", "conjugate" or "kalman"
    cells: int | None = None
    description: str = ""

    def metadata(self) -> dict:
        return {
            "name": self.name,
            "discrete": self.discrete,
            "score_count": self.score_count,
            "oracle": self.oracle,
            "cells": self.cells,
            "description": self.description,
        }


REGISTRY = {
    m.name: m
    for m in [
        ModelInfo("sprinkler", sprinkler, True, 1, "enumeration", 100, "rain given wet grass"),
        ModelInfo("geometric-soft", geometric_soft, True, 1, "enumeration", 2, "capped geometric with a soft penalty"),
        ModelInfo("beta-bernoulli", beta_bernoulli, False, len(BETA_BERNOULLI_DATA), "conjugate", None, "coin bias, 6 heads in 9"),
        ModelInfo("gaussian-mean", gaussian_mean, False, len(GAUSSIAN_MEAN_DATA), "conjugate", None, "normal mean, 5 observations"),
        ModelInfo("lin-gauss-ssm", lin_gauss_ssm, False, len(SSM_DATA), "kalman", None, "3-step linear-Gaussian state-space model"),
    ]
}


def get_model(name: str) -> ModelInfo:
    try:
        return REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown model {name!r}") from None


def list_models() -> list[dict]:
    return [m.metadata() for m in REGISTRY.values()]
