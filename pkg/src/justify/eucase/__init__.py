"""Expected-utility justifications over lotteries."""

from .checks import (
    check_convexity,
    check_eu_axioms,
    check_independence,
    check_monotonicity,
    tokenized,
)
from .cones import UnsupportedSizeError
from .geometry import (
    BETTER_CHOSEN,
    NB,
    B,
    CoIntersection,
    NumericError,
    Strictness,
    W,
    b_sample,
    classify,
    classify_many,
    co_intersect_b,
    compare_strictness,
    construct_polytope,
    eu_choose,
    eu_generate,
    fosd,
    joint_prediction,
    maximal_polytope,
    minimal_polytope,
    utility_angle,
)
from .lottery import (
    EPS,
    TIE_TOL,
    BSample,
    EUModel,
    Lottery,
    LotteryDataset,
    PrizeSpace,
    lattice_around,
    normalize,
    simplex_grid,
)
from .recovery import (
    IdentificationError,
    Recovery,
    observed_sample,
    recover_true_preference,
)

__all__ = [
    "B",
    "BETTER_CHOSEN",
    "EPS",
    "NB",
    "TIE_TOL",
    "W",
    "BSample",
    "CoIntersection",
    "EUModel",
    "IdentificationError",
    "Lottery",
    "LotteryDataset",
    "NumericError",
    "PrizeSpace",
    "Recovery",
    "Strictness",
    "UnsupportedSizeError",
    "b_sample",
    "check_convexity",
    "check_eu_axioms",
    "check_independence",
    "check_monotonicity",
    "classify",
    "classify_many",
    "co_intersect_b",
    "compare_strictness",
    "construct_polytope",
    "eu_choose",
    "eu_generate",
    "fosd",
    "joint_prediction",
    "lattice_around",
    "maximal_polytope",
    "minimal_polytope",
    "normalize",
    "observed_sample",
    "recover_true_preference",
    "simplex_grid",
    "tokenized",
    "utility_angle",
]
