"""Universal LDPC code design over all symmetric channels of a given capacity."""

__version__ = "0.1.0"

from .density import (
    BEC,
    BIAWGN,
    BSC,
    DEFAULT_GRID,
    ErrorProbDensity,
    Explicit,
    Grid,
    Mix,
    SymmetricDensity,
    bhattacharyya,
    capacity,
    error_prob,
    from_error_prob_density,
    make_density,
    mix,
    to_error_prob_density,
)
from .decomposition import BasisSet, DecompositionWeights, decompose, make_basis, recompose, sample_channel
from .ensemble import AWGN_CODE, UNIVERSAL_CODE, DegreeDistribution, design_rate
from .entropy import binary_entropy, binary_entropy_inverse
from .evolution import DEReport, chk_conv, converges, converges_all, de_step, var_conv
from .stability import StabilityReport, bec_bound_trajectory, hull_stability, stability_check
from .design import DesignProblem, DesignResult, optimize_lambda, sweep_rho
from .threshold import ThresholdResult, universal_threshold, validate_conjecture
from .decoder import TannerGraph, build_graph, decode, measure_ber

__all__ = [
    "AWGN_CODE",
    "BEC",
    "BIAWGN",
    "BSC",
    "BasisSet",
    "DEFAULT_GRID",
    "DEReport",
    "DecompositionWeights",
    "DegreeDistribution",
    "DesignProblem",
    "DesignResult",
    "ErrorProbDensity",
    "Explicit",
    "Grid",
    "Mix",
    "StabilityReport",
    "SymmetricDensity",
    "TannerGraph",
    "ThresholdResult",
    "UNIVERSAL_CODE",
    "bec_bound_trajectory",
    "bhattacharyya",
    "binary_entropy",
    "binary_entropy_inverse",
    "build_graph",
    "capacity",
    "chk_conv",
    "converges",
    "converges_all",
    "de_step",
    "decode",
    "decompose",
    "design_rate",
    "error_prob",
    "from_error_prob_density",
    "hull_stability",
    "make_basis",
    "make_density",
    "measure_ber",
    "mix",
    "optimize_lambda",
    "recompose",
    "sample_channel",
    "stability_check",
    "sweep_rho",
    "to_error_prob_density",
    "universal_threshold",
    "validate_conjecture",
    "var_conv",
]
