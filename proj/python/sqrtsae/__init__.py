"""Squared-shrinkage predictors for Poisson small-area means."""

from ._core import (
    InputError,
    NumericError,
    ShrinkageProfile,
    __version__,
    b_substitute_bias,
    bayes_mspe,
    bayes_predict,
    bias,
    correction_constant,
    direct_predict,
    estimate,
    g1,
    g2,
    mle_xbeta,
    mspe_oracle_terms,
    mspe_theoretical,
    negative_probability,
    normal_cdf,
    optimal_weight,
    predict,
    profile,
    run_study,
    solve_cubic_real,
    weight_gap_bound,
)

__all__ = [
    "InputError",
    "NumericError",
    "ShrinkageProfile",
    "__version__",
    "b_substitute_bias",
    "bayes_mspe",
    "bayes_predict",
    "bias",
    "correction_constant",
    "direct_predict",
    "estimate",
    "g1",
    "g2",
    "mle_xbeta",
    "mspe_oracle_terms",
    "mspe_theoretical",
    "negative_probability",
    "normal_cdf",
    "optimal_weight",
    "predict",
    "profile",
    "run_study",
    "solve_cubic_real",
    "weight_gap_bound",
]
