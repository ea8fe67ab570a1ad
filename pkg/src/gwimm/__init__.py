"""Exact, simulated and asymptotic distributions of critical branching
processes with immigration."""

from .models import (
    Law,
    Model,
    classify_xlogx,
    make_law,
    make_model,
)
from .pgf import (
    DeficitError,
    IterateCache,
    TruncatedPmf,
    charfn_modulus,
    exact_pmf_Y,
    exact_pmf_Y_multi,
    exact_pmf_Z,
    extinction_iterates,
    kolmogorov_diagnostic,
    pgf_eval,
    step_pmf,
)

__all__ = [
    "Law",
    "Model",
    "classify_xlogx",
    "make_law",
    "make_model",
    "DeficitError",
    "IterateCache",
    "TruncatedPmf",
    "charfn_modulus",
    "exact_pmf_Y",
    "exact_pmf_Y_multi",
    "exact_pmf_Z",
    "extinction_iterates",
    "kolmogorov_diagnostic",
    "pgf_eval",
    "step_pmf",
]

__version__ = "0.1.0"
