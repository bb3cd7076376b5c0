"""Bootstrapped local surrogate explanations with ordinal consensus."""

from ._blime import (
    RANK_CONVENTION,
    BlimeError,
    ConfigError,
    InputError,
    IoError,
    ProtocolError,
    build_report,
    explain,
    fit_weighted_ridge,
    fleiss_kappa,
    grid_segment,
    kendall_w,
    kernel_weights,
    mean_ranks,
    ordinal_consensus,
    rank_coefficients,
    sweep,
    tokenize,
)

__all__ = [
    "RANK_CONVENTION",
    "BlimeError",
    "ConfigError",
    "InputError",
    "IoError",
    "ProtocolError",
    "build_report",
    "explain",
    "fit_weighted_ridge",
    "fleiss_kappa",
    "grid_segment",
    "kendall_w",
    "kernel_weights",
    "mean_ranks",
    "ordinal_consensus",
    "rank_coefficients",
    "sweep",
    "tokenize",
]
