"""Synthesized bit channels: exact oracle, SC recursion, estimation, sets."""

from .context import (
    ContextError,
    PolarContext,
    SchemeBundle,
    detbc_bundle,
    marton_bundle,
    model_hash,
    superposition_bundle,
)
from .estimate import IndexStats, estimate_many, estimate_stats_mc
from .exact import (
    ExactBitChannel,
    ExactContextTable,
    TooLargeError,
    TVDiagnostic,
    exact_bit_channel,
    evolved_stats,
    exact_stats,
    oracle_max_diff,
    tv_diagnostic,
)
from .sc import SuccessiveCanceller, genie_llrs, prob_zero, sc_likelihood, sc_log_likelihood
from .sets import (
    AlignmentReport,
    ConstructionError,
    PolarizationSets,
    build_sets,
    check_alignment,
    derive_sets,
    polarization_delta,
    sets_from_stats,
)

__all__ = [
    "AlignmentReport",
    "ConstructionError",
    "ContextError",
    "ExactBitChannel",
    "ExactContextTable",
    "IndexStats",
    "PolarContext",
    "PolarizationSets",
    "SchemeBundle",
    "SuccessiveCanceller",
    "TVDiagnostic",
    "TooLargeError",
    "build_sets",
    "check_alignment",
    "derive_sets",
    "detbc_bundle",
    "estimate_many",
    "estimate_stats_mc",
    "exact_bit_channel",
    "evolved_stats",
    "exact_stats",
    "genie_llrs",
    "marton_bundle",
    "model_hash",
    "oracle_max_diff",
    "polarization_delta",
    "prob_zero",
    "sc_likelihood",
    "sc_log_likelihood",
    "sets_from_stats",
    "superposition_bundle",
    "tv_diagnostic",
]
