"""Sparse-signal recovery from compressed linear measurements.

Recovers k-sparse (or nearly sparse) vectors x from y = Ax (+ noise) with
m < n rows, via non-convex ℓq-regularized proximal-gradient iterations, the
classical ℓ1/hard-threshold baselines, a momentum variant, and an unfolded
fixed-depth forward pass with externally supplied per-layer parameters.

Numeric kernels run on a compiled backend when built, with a pure-NumPy
fallback selected automatically at import (see ``backend_name``; override
with the LQSPARSE_BACKEND environment variable).
"""

from ._kernels import backend_name
from .bench import (
    PRESETS,
    SOLVER_NAMES,
    Preset,
    SweepResult,
    SweepRow,
    SweepSpec,
    get_preset,
    run_convergence_trace,
    run_success_rate_sweep,
    write_csv,
)
from .core import (
    FormatError,
    InvalidInputError,
    IterateTrace,
    ProblemInstance,
    RecoveryReport,
    SolverConfig,
    add_noise_snr,
    derive_seed,
    functional_h,
    generate_bernoulli_gaussian,
    generate_gaussian_matrix,
    generate_k_sparse_signal,
    load_instance,
    make_instance,
    objective_approx,
    objective_lq,
    relative_error,
    save_instance,
    snr_db,
    spectral_norm,
)
from .prox import (
    ThresholdRule,
    adaptive_threshold_values,
    generalized_prox,
    hard_threshold_keep_k,
    qista_threshold,
    soft_threshold,
)
from .solvers import (
    LAYER_PARAMS_SCHEMA,
    LayerParams,
    MomentumState,
    UnfoldedModel,
    default_unfolded_model,
    gradient_step,
    load_layer_params,
    save_layer_params,
    solve_fista,
    solve_iht,
    solve_ista,
    solve_qista,
    solve_qista_momentum,
    solve_unfolded,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "backend_name",
    # core
    "ProblemInstance",
    "SolverConfig",
    "RecoveryReport",
    "IterateTrace",
    "InvalidInputError",
    "FormatError",
    "spectral_norm",
    "generate_gaussian_matrix",
    "generate_k_sparse_signal",
    "generate_bernoulli_gaussian",
    "add_noise_snr",
    "relative_error",
    "snr_db",
    "objective_lq",
    "objective_approx",
    "functional_h",
    "derive_seed",
    "make_instance",
    "save_instance",
    "load_instance",
    # prox
    "ThresholdRule",
    "soft_threshold",
    "adaptive_threshold_values",
    "qista_threshold",
    "hard_threshold_keep_k",
    "generalized_prox",
    # solvers
    "LayerParams",
    "UnfoldedModel",
    "MomentumState",
    "LAYER_PARAMS_SCHEMA",
    "gradient_step",
    "solve_qista",
    "solve_ista",
    "solve_fista",
    "solve_iht",
    "solve_qista_momentum",
    "solve_unfolded",
    "default_unfolded_model",
    "save_layer_params",
    "load_layer_params",
    # bench
    "Preset",
    "PRESETS",
    "get_preset",
    "SOLVER_NAMES",
    "SweepSpec",
    "SweepRow",
    "SweepResult",
    "run_success_rate_sweep",
    "run_convergence_trace",
    "write_csv",
]
