"""Coupled inequalities between weighted means.

Evaluation of two-parameter (Gini), power and generalized weighted
quasi-arithmetic means; exact local and global validity decisions for
Minkowski-type (sum-coupled) and Hoelder-type (product-coupled)
inequalities between them; eigenvalue and finite-difference oracles; and a
counterexample search engine.
"""

from ._backend import BACKEND, backend_name, warmup
from .diagcalc import (
    GradientCheckReport,
    InequalityProblem,
    PhiSpec,
    deficiency,
    deficiency_derivatives,
    deficiency_gradient_check,
    deficiency_parts,
    diag_first_partials,
    diag_second_partials,
    diagonal_matrix,
    weight_proportionality_check,
)
from .errors import (
    CapabilityError,
    ConfigError,
    ConstructionError,
    ContractError,
    DomainError,
    MeanineqError,
    NumericError,
    ShapeError,
)
from .globalcheck import (
    GlobalClass,
    GlobalVerdict,
    check_pointwise_sufficient,
    check_pointwise_hoelder,
    check_pointwise_minkowski,
    decide_hoelder_global,
    decide_minkowski_2var,
    decide_minkowski_global,
    ratio_interval,
)
from .local import (
    GammaSpec,
    LocalClass,
    LocalVerdict,
    LocalWitness,
    build_psi_probe,
    decide_hoelder_local,
    decide_minkowski_local,
    gamma_at,
    local_scan,
    scan_gamma_grid,
)
from .means import (
    BajraktarevicSpec,
    Convexifier,
    GiniMean,
    GiniParams,
    Interval,
    Weights,
    WeightFunction,
    bajraktarevic_mean,
    chi,
    gini_as_bajraktarevic,
    gini_convexifier,
    gini_mean,
    power_mean,
)
from .psd import (
    PsdClass,
    PsdResult,
    ShiftedDiagonal,
    classify_shifted_diagonal,
    classify_symmetric,
    jacobi_eigh,
    negative_direction,
)
from .search import (
    Counterexample,
    certify,
    diagonal_distance,
    search_global,
    search_local,
    shrink,
)

__version__ = "0.1.0"
