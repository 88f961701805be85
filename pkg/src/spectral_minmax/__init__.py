"""Spectral distribution and quantile functions, and trace minmax identities for Hermitian matrices."""

from .majorization import add_quantiles, domination_check, lidskii_check, majorizes
from .matrix_spectra import (Hermitian, Projection, bv_max_trace, eigh, kyfan_value,
                             normalized_trace, perturb_distinct, random_hermitian,
                             spectral_distribution, spectral_projection)
from .measures import (CompactMeasure, Cdf, Quantile, cdf_from_quantile, cdf_of, discretize,
                       partial_quantile_integral, quantile_of, semicircle)
from .minmax_verifier import (verify_conditional_min, verify_courant_fischer, verify_kyfan,
                              verify_wielandt)
from .projection_lattice import (complete_orthogonal_family, interpolate_projection, join,
                                 matched_families, meet, random_projection)
from .reports import VerificationReport

__all__ = [
    "CompactMeasure", "Cdf", "Quantile", "Hermitian", "Projection", "VerificationReport",
    "cdf_of", "quantile_of", "cdf_from_quantile", "partial_quantile_integral", "discretize",
    "semicircle", "eigh", "normalized_trace", "spectral_distribution", "spectral_projection",
    "kyfan_value", "bv_max_trace", "perturb_distinct", "random_hermitian", "join", "meet",
    "random_projection", "interpolate_projection", "complete_orthogonal_family",
    "matched_families", "verify_kyfan", "verify_conditional_min", "verify_courant_fischer",
    "verify_wielandt", "majorizes", "add_quantiles", "lidskii_check", "domination_check",
]
