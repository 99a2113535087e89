"""Moments, asymptotics and limit laws for the time to collect m complete
sets of N unequally likely coupons."""

from .errors import (
    BudgetExceeded,
    DichotomyError,
    DixieError,
    InvalidParameter,
    NotSorted,
    StateSpaceTooLarge,
    ToleranceNotMet,
    UnclassifiedError,
    UnsupportedOperation,
)
from .seqmodel import (
    Case,
    CaseLabel,
    CouponModel,
    Kind,
    MomentEstimate,
    SequenceFamily,
    a_sum_asymptotic,
    a_sum_exact,
    build_model,
    classify,
)
from .moments import (
    expectation,
    internal_integral,
    limit_constant,
    mgf,
    rising_moment,
    second_rising,
    survival_product,
    truncation_bound,
    variance,
)
from .asymptotics import (
    ExpansionReport,
    case2_expansion,
    case2_scales,
    equal_case_expansion,
    expectation_expansion_case1,
    expectation_expansion_case2,
    second_rising_expansion_case2,
    variance_case1,
    variance_leading_case2,
)
from .limitdist import (
    Law,
    LawKind,
    Normalization,
    case1_limit_cdf,
    gumbel_normalization,
    lambda_functional,
    limit_cdf,
)
from .simulate import (
    EmpiricalDistribution,
    KsResult,
    exact_small,
    ks_statistic,
    normalized_samples,
    run_mc,
    sample_t,
)

__version__ = "0.1.0"
