"""Mutual-information sensor placement for Gaussian process fields.

Core pieces: an RBF covariance model with likelihood-based fitting
(:mod:`.kernels`, :mod:`.gp`), mutual-information objectives with a
factor-once evaluation cache that makes each query cubic in the
selected-set size instead of the candidate-set size (:mod:`.mi`,
:mod:`.objectives`), greedy and lazy-greedy maximization
(:mod:`.select`), and a benchmark harness with CSV/JSON reporting
(:mod:`.bench`, :mod:`.cli`).
"""

from .errors import (
    DataError,
    DatasetParseError,
    DegenerateDataError,
    FittingError,
    InsufficientDataError,
    InvalidInputError,
    PlacementError,
    SingularMatrixError,
)
from .kernels import (
    HyperParams,
    cov_matrix,
    default_jitter,
    fit_hyperparams,
    kernel_eval,
    log_marginal_likelihood,
)
from .gp import Metrics, Posterior, metrics, posterior
from .mi import (
    MICache,
    build_cache,
    entropy,
    logdet,
    schur_mi,
    schur_mi_no_precompute,
    standard_mi,
    union_mi,
)
from .objectives import KINDS, ObjectiveSpec, evaluate, marginal_gain
from .select import (
    SelectionResult,
    SurrogateSet,
    default_surrogate_sigma,
    greedy,
    lazy_greedy,
    make_surrogate,
    median_nn_distance,
    select_sensors,
)
from .data import Dataset, load_dataset, make_synthetic
from .bench import (
    RunConfig,
    RunRecord,
    RunReport,
    measure_eval_time,
    report_to_csv,
    report_to_json,
    run_experiment,
    verify,
)

__version__ = "0.1.0"

__all__ = [
    "DataError",
    "Dataset",
    "DatasetParseError",
    "DegenerateDataError",
    "FittingError",
    "HyperParams",
    "InsufficientDataError",
    "InvalidInputError",
    "KINDS",
    "Metrics",
    "MICache",
    "ObjectiveSpec",
    "PlacementError",
    "Posterior",
    "RunConfig",
    "RunRecord",
    "RunReport",
    "SelectionResult",
    "SingularMatrixError",
    "SurrogateSet",
    "build_cache",
    "cov_matrix",
    "default_jitter",
    "default_surrogate_sigma",
    "entropy",
    "evaluate",
    "fit_hyperparams",
    "greedy",
    "kernel_eval",
    "lazy_greedy",
    "log_marginal_likelihood",
    "logdet",
    "load_dataset",
    "make_surrogate",
    "make_synthetic",
    "marginal_gain",
    "measure_eval_time",
    "median_nn_distance",
    "metrics",
    "posterior",
    "report_to_csv",
    "report_to_json",
    "run_experiment",
    "schur_mi",
    "schur_mi_no_precompute",
    "select_sensors",
    "standard_mi",
    "union_mi",
    "verify",
]
