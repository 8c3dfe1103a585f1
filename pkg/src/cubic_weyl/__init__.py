"""Cubic Weyl sums, complete cubic exponential sums, and smooth-denominator
rational approximations of quadratic irrationals, with numerical checks of
the inequalities that connect them."""

from .errors import (
    ConsistencyError,
    CubicWeylError,
    FactorizationError,
    InfeasibleSplitError,
    InvalidInputError,
    NoApproximationError,
    ResourceError,
)
from .exp_sums import (
    ShiftSpec,
    SumValue,
    complete_cubic_spectrum,
    complete_cubic_sum,
    linear_sum_T,
    s4,
    shifted_products,
)
from .factor_plan import FactorSplit, genthm_rhs, powerful_part, split_q
from .harness import SuiteReport, abc_quality, exponent_scan, iteration_trace, run_suite
from .quad_field import (
    PellUnit,
    PowerTerm,
    QuadraticIrrational,
    RationalApprox,
    choose_m,
    lucas_ratio,
    pell_fundamental,
    pell_power,
    smooth_approx,
)
from .weyl_sums import WeylContext, eta_r, hq_decompose_check, transfer_bound_check, weyl_sum

__version__ = "0.1.0"
