"""Composable Bayesian inference from representations, transformations and transformers."""

from .algorithms import (
    SmcConfig,
    dwrand,
    importance,
    resample,
    rmsmc,
    run_population,
    run_rmsmc,
    run_smc,
    smc,
    trace_mh,
)
from .core import (
    InferenceError,
    InvalidPath,
    InvalidPrefix,
    RngState,
    StepBudgetExceeded,
    UnsupportedPayload,
    Weighted,
    next_uniform,
    normal_quantile,
)
from .discrete import ENUM, MASS, TERM, MassFn
from .oracle import DiscretizedBase, exact_meaning, summarize
from .sampler import SAMPLER, program_to_rep, run, run_fresh
from .transformers import ListT, Population, Suspension, Weighting

__version__ = "0.1.0"
