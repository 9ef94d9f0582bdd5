"""Longitudinal network models: estimation, simulation, and comparison.

Two model families over directed binary network panels — discrete-time
exponential-family models with memory terms, and actor-oriented mini-step
models — with a shared statistic registry, out-of-sample predictive
evaluation, replicated synthetic-process experiments, and a CLI.
"""

from . import io
from ._kernels import BACKEND_NAME, available_backends
from .errors import (
    ConfigurationError,
    ConvergenceError,
    DegeneracyWarning,
    DerivativeSingularityError,
    EstimationError,
    InvalidDyadError,
    InvalidNetworkError,
    NetpanelError,
    NonConvergenceWarning,
    ScreeningExhaustedError,
    SeparationError,
    UndefinedCurveError,
    UndefinedTestError,
)
from .evaluation import (
    AUXILIARY_KINDS,
    CurveResult,
    GofTable,
    PredictionEnsemble,
    TestResult,
    auxiliary_gof,
    diff_auc,
    diff_endogenous,
    one_sided_p,
    pr_curve,
    roc_curve,
    two_sample_t,
)
from .experiments import (
    ExperimentConfig,
    ExperimentReport,
    ReplicationStudyConfig,
    ReplicationStudyReport,
    generate_saom_process,
    generate_tergm_process,
    replicate_knecht,
    run_experiment,
    sample_parameters,
)
from .network import (
    Covariates,
    DirectedNetwork,
    GeodesicDistribution,
    NetworkPanel,
    degree_distributions,
    density,
    geodesic_distribution,
    shared_partner_distributions,
)
from .rng import child_rng, child_seed, fresh_seed
from .saom import (
    MiniStepTrace,
    RobbinsMonroConfig,
    SaomFit,
    SaomModel,
    draw_opportunity_count,
    fit_mom,
    forward_predict,
    mini_step,
    mini_step_probabilities,
    simulate_period,
)
from .statistics import (
    KINDS,
    MEMORY_KINDS,
    StatisticSpec,
    change_matrix,
    change_value,
    egocentric_change,
    egocentric_value,
    global_value,
)
from .tergm import (
    TergmFit,
    TergmModel,
    fit_mple,
    forward_simulate_panel,
    simulate,
)

__version__ = "0.1.0"

__all__ = [
    "AUXILIARY_KINDS",
    "BACKEND_NAME",
    "ConfigurationError",
    "ConvergenceError",
    "Covariates",
    "CurveResult",
    "DegeneracyWarning",
    "DerivativeSingularityError",
    "DirectedNetwork",
    "EstimationError",
    "ExperimentConfig",
    "ExperimentReport",
    "GeodesicDistribution",
    "GofTable",
    "InvalidDyadError",
    "InvalidNetworkError",
    "KINDS",
    "MEMORY_KINDS",
    "MiniStepTrace",
    "NetpanelError",
    "NetworkPanel",
    "NonConvergenceWarning",
    "PredictionEnsemble",
    "ReplicationStudyConfig",
    "ReplicationStudyReport",
    "RobbinsMonroConfig",
    "SaomFit",
    "SaomModel",
    "ScreeningExhaustedError",
    "SeparationError",
    "StatisticSpec",
    "TergmFit",
    "TergmModel",
    "TestResult",
    "UndefinedCurveError",
    "UndefinedTestError",
    "auxiliary_gof",
    "available_backends",
    "change_matrix",
    "change_value",
    "child_rng",
    "child_seed",
    "degree_distributions",
    "density",
    "diff_auc",
    "diff_endogenous",
    "draw_opportunity_count",
    "egocentric_change",
    "egocentric_value",
    "fit_mom",
    "fit_mple",
    "forward_predict",
    "forward_simulate_panel",
    "fresh_seed",
    "generate_saom_process",
    "generate_tergm_process",
    "geodesic_distribution",
    "global_value",
    "mini_step",
    "mini_step_probabilities",
    "one_sided_p",
    "pr_curve",
    "replicate_knecht",
    "roc_curve",
    "run_experiment",
    "sample_parameters",
    "shared_partner_distributions",
    "simulate",
    "simulate_period",
    "two_sample_t",
    "__version__",
]
