"""Sharp bounds on persuasion rates and probabilities of causation.

Bounds are computed from the joint distribution of a binary outcome and a
binary treatment under monotone treatment response (MTR) and/or monotone
treatment selection (MTS), estimated from microdata with cluster-robust
standard errors, and checked against a numerical search over the latent
type distribution.
"""

from .bounds import (
    ate_upper,
    mts_complementarity,
    mts_only_uppers,
    shares_bounds,
    sharp_bounds,
    theta_r_upper,
    theta_upper,
)
from .errors import *  # noqa: F401,F403
from .estimate import (
    BoundEstimate,
    CellCounts,
    MicroSample,
    clustered_se,
    point_estimates,
    reconstruct_joint,
    tabulate,
)
from .inference import (
    norm_cdf,
    norm_quantile,
    one_sided_ci,
    shares_ci,
    spec_test_ci,
    stoye_ci,
    stoye_critical,
)
from .model import (
    ALL_ROWS,
    MTR_MTS,
    MTR_ONLY,
    MTS_ONLY,
    NO_ASSUMPTIONS,
    AssumptionSet,
    DerivedProbs,
    Estimand,
    Interval,
    JointDistribution,
    TypeShares,
    derive,
    validate,
)
from .oracle import feasible_region, oracle_extrema, sharp_bounds_oracle, shares_oracle
from .sim import DgpSpec, McReport, draw_sample, implied_joint, run_coverage

__version__ = "0.1.0"
