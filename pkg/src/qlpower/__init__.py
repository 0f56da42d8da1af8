"""qlpower: power and sample size analysis for quasi-likelihood regression.

Exact and approximated effect sizes (f2, the 2SLiP contrast, pseudo-partial
R-squared, and the score-test effect), non-central chi-squared power
arithmetic, a replicated calibration harness, and a pilot-study planner.
"""

__version__ = "0.1.0"

from .datagen import (
    CovariateDesign,
    OutcomeCase,
    OutcomeKind,
    coefficient_search,
    gen_covariates,
    gen_dataset,
    gen_outcome,
)
from .distributions import (
    NoncentralChiSq,
    RngStream,
    chisq_quantile,
    ncchisq_cdf,
    ncp_for_power,
    sample_bernoulli,
    sample_gamma,
    sample_normal_pair,
    sample_poisson,
)
from .effectsize import (
    CovariateSample,
    EffectSizeReport,
    ProjectionA,
    effect_size_report,
    p2r2,
    projection_a,
    score_f2,
    true_f2,
    two_slip,
)
from .errors import (
    DimensionError,
    DomainError,
    EmptyGridError,
    InadmissibleMeanError,
    InvalidDispersionError,
    NonConvergenceError,
    QLPowerError,
    SingularBlockError,
    SingularDesignError,
    SingularMomentError,
    TooSmallEffectError,
)
from .estimation import FitOptions, FitResult, information, irls_fit, restricted_fit, schur_complement
from .inference import TestReport, score_test, wald_test
from .model import Dataset, Link, ModelSpec, VarianceFunction, linear_predictor, weight
from .planner import PilotMapping, PilotReport, load_pilot_csv, pilot_analyze
from .power import MAX_SAMPLE_SIZE, power_at, sample_size
from .simharness import SimResult, SimScenario, run_scenario, scenario_presets
