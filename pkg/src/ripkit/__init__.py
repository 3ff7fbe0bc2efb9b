"""Toolkit for restricted isometry analysis of sensing matrices.

Exact and sampled isometry constants, concentration-of-measure tail
experiments, product-matrix envelopes, redundant-dictionary bounds, and
l1 sparse recovery, all seeded and reproducible.
"""

__version__ = "0.1.0"

from .linalg import (
    EnsembleSpec,
    SvdFactorization,
    as_matrix,
    derive_seed,
    draw_ensemble,
    gram_eigenvalues,
    multiply,
    read_matrix,
    svd,
    write_matrix,
)
from .rip import (
    RicEstimate,
    RipReport,
    enumerate_supports,
    estimate_ric,
    exact_ric,
    restrict_columns,
    scaled_ric,
)
from .concentration import (
    CompositionParams,
    ConcentrationParams,
    DimensioningParams,
    TailEstimate,
    c0_of,
    compose_epsilons,
    compose_exponent,
    composed_tail_experiment,
    estimate_tail,
    max_order,
    required_rows,
    rip_event_probability,
    tail_bound,
)
from .transforms import (
    DictionaryBound,
    EnvelopeReport,
    LeftProductAnalysis,
    ProbabilityBound,
    RightProductAnalysis,
    analyze_left_product,
    analyze_right_product,
    dictionary_bound,
    dictionary_experiment,
    lambda_window_check,
    union_probability,
    verify_left_envelope,
)
from .recovery import (
    RecoveryResult,
    SolverConfig,
    SparseSignal,
    best_k_term_error,
    recovery_error_ratio,
    run_recovery_trials,
    soft_threshold,
    solve_basis_pursuit,
)
