"""Equality-constrained l1 minimization and recovery experiments.

The solver is an alternating-direction splitting: project onto the
measurement-consistent affine set, shrink with the l1 proximal map, update
the scaled dual, repeat. The projection reuses the pseudo-inverse of the
sensing matrix, computed once per solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .linalg import EnsembleSpec, as_matrix, as_vector, derive_seed, draw_ensemble

# Smallest singular value above which the sensing matrix counts as full row rank.
ROW_RANK_TOLERANCE = 1e-10

# Relative l2 error below which a trial counts as successful recovery.
SUCCESS_TOLERANCE = 1e-4


def soft_threshold(v, tau: float) -> np.ndarray:
    """Elementwise ``sign(v) * max(|v| - tau, 0)``, the l1 proximal map."""
    if tau < 0.0:
        raise ValueError(f"threshold must be nonnegative, got {tau}")
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def best_k_term_error(x, k: int) -> float:
    """l1 mass of ``x`` outside its k largest-magnitude entries."""
    x = np.asarray(x, dtype=float).ravel()
    if not 0 <= k <= x.size:
        raise ValueError(f"k must satisfy 0 <= k <= {x.size}, got {k}")
    mags = np.sort(np.abs(x))
    return float(mags[: x.size - k].sum())


@dataclass(frozen=True)
class SolverConfig:
    """Tunables for the alternating-direction l1 solver."""

    penalty_parameter: float = 1.0
    max_iterations: int = 5000
    primal_tolerance: float = 1e-7
    dual_tolerance: float = 1e-7

    def __post_init__(self):
        if self.penalty_parameter <= 0.0:
            raise ValueError("penalty parameter must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.primal_tolerance <= 0.0 or self.dual_tolerance <= 0.0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class RecoveryResult:
    """Outcome of one l1 minimization solve."""

    estimate: np.ndarray
    iterations_used: int
    constraint_residual: float
    converged: bool
    l1_value: float


def solve_basis_pursuit(phi, y, config: SolverConfig | None = None) -> RecoveryResult:
    """Approximately solve ``min ||x||_1  subject to  phi @ x = y``.

    Alternates (i) projection onto the affine constraint set, shifted by the
    running dual, (ii) soft thresholding, (iii) dual update. Convergence is
    declared when the primal residual ``||x - z||`` and the dual residual
    ``rho * ||z - z_prev||`` fall below their relative tolerances. Returns
    the best (lowest combined relative residual) iterate seen.

    The sensing matrix must be wide (rows <= cols) with full row rank; the
    projection is exact, so returned iterates satisfy the constraint to
    machine precision.
    """
    config = config or SolverConfig()
    phi = as_matrix(phi)
    n, big_n = phi.shape
    y = as_vector(y, n)
    if n > big_n:
        raise ValueError(f"matrix must be wide (rows <= cols), got {n}x{big_n}")
    singulars = np.linalg.svd(phi, compute_uv=False)
    if singulars[-1] <= ROW_RANK_TOLERANCE:
        raise ValueError("sensing matrix must have full row rank")
    pinv = np.linalg.pinv(phi)
    feasible = pinv @ y
    rho = config.penalty_parameter
    shrink = 1.0 / rho

    x = feasible.copy()
    z = x.copy()
    u = np.zeros(big_n)
    best_x = x
    best_score = math.inf
    y_scale = max(1.0, float(np.linalg.norm(y)))
    iterations = 0
    converged = False
    for iterations in range(1, config.max_iterations + 1):
        v = z - u
        x = v - pinv @ (phi @ v) + feasible
        z_new = soft_threshold(x + u, shrink)
        u = u + x - z_new
        primal = float(np.linalg.norm(x - z_new))
        dual = rho * float(np.linalg.norm(z_new - z))
        z = z_new
        primal_scale = max(1.0, float(np.linalg.norm(x)), float(np.linalg.norm(z)))
        dual_scale = max(1.0, rho * float(np.linalg.norm(u)))
        score = max(primal / primal_scale, dual / dual_scale)
        if score < best_score:
            best_score = score
            best_x = x
        if primal <= config.primal_tolerance * primal_scale and dual <= config.dual_tolerance * dual_scale:
            converged = True
            break

    residual = float(np.linalg.norm(phi @ best_x - y))
    converged = converged and residual <= config.primal_tolerance * y_scale
    return RecoveryResult(
        estimate=best_x,
        iterations_used=iterations,
        constraint_residual=residual,
        converged=converged,
        l1_value=float(np.abs(best_x).sum()),
    )


@dataclass(frozen=True)
class ErrorRatio:
    """Recovery error against the best k-term approximation error."""

    l2_error: float
    sigma_k: float
    ratio: float
    exact_sparse: bool


def recovery_error_ratio(x_true, x_hat, k: int) -> ErrorRatio:
    """Compare ``||x - x_hat||_2 * sqrt(k) / sigma_k(x)`` where defined.

    For exactly k-sparse signals ``sigma_k`` vanishes and the ratio is
    flagged instead (recovery should then be exact up to solver tolerance).
    """
    x_true = np.asarray(x_true, dtype=float).ravel()
    x_hat = np.asarray(x_hat, dtype=float).ravel()
    if x_true.size != x_hat.size:
        raise ValueError(f"length mismatch: {x_true.size} vs {x_hat.size}")
    l2 = float(np.linalg.norm(x_true - x_hat))
    sigma = best_k_term_error(x_true, k)
    if sigma > 0.0:
        return ErrorRatio(l2_error=l2, sigma_k=sigma, ratio=l2 * math.sqrt(k) / sigma, exact_sparse=False)
    return ErrorRatio(l2_error=l2, sigma_k=sigma, ratio=math.nan, exact_sparse=True)


@dataclass(frozen=True)
class SparseSignal:
    """A generated signal together with its nominal sparsity."""

    length: int
    entries: np.ndarray
    nominal_sparsity: int

    def __post_init__(self):
        if int(np.count_nonzero(self.entries)) > self.nominal_sparsity:
            raise ValueError("signal has more nonzeros than its nominal sparsity")


def draw_sparse_signal(length: int, k: int, rng: np.random.Generator) -> SparseSignal:
    """Exactly-k-sparse signal: uniform support, standard normal nonzeros."""
    entries = np.zeros(length)
    if k > 0:
        support = np.sort(rng.choice(length, size=k, replace=False))
        entries[support] = rng.standard_normal(k)
    return SparseSignal(length=length, entries=entries, nominal_sparsity=k)


@dataclass(frozen=True)
class TrialRecord:
    """Per-trial row of a recovery experiment."""

    trial: int
    success: bool
    l2_error: float
    sigma_k: float
    iterations: int
    residual: float


@dataclass(frozen=True)
class RecoveryTrialStats:
    """Aggregate outcome of seeded recovery trials."""

    trials: int
    successes: int
    success_rate: float
    success_tolerance: float
    seed: int
    records: tuple[TrialRecord, ...] = field(repr=False)


def run_recovery_trials(
    phi_spec: EnsembleSpec,
    n_signal: int,
    k: int,
    trials: int,
    seed: int,
    config: SolverConfig | None = None,
) -> RecoveryTrialStats:
    """Seeded sparse-recovery success-rate experiment.

    Per trial: draw a fresh sensing matrix, an exactly-k-sparse signal,
    measure, solve, and count success when the relative l2 error is below
    ``SUCCESS_TOLERANCE``. Deterministic given the seed.
    """
    config = config or SolverConfig()
    if n_signal != phi_spec.cols:
        raise ValueError(
            f"signal length {n_signal} must equal the ensemble column count {phi_spec.cols}"
        )
    if not 0 <= k <= n_signal:
        raise ValueError(f"sparsity must satisfy 0 <= k <= {n_signal}, got {k}")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    records = []
    successes = 0
    for i in range(trials):
        phi = draw_ensemble(replace(phi_spec, seed=derive_seed(seed, i, 0)))
        rng = np.random.default_rng(np.random.SeedSequence((seed, i, 1)))
        signal = draw_sparse_signal(n_signal, k, rng)
        y = phi @ signal.entries
        result = solve_basis_pursuit(phi, y, config)
        l2 = float(np.linalg.norm(result.estimate - signal.entries))
        ok = l2 <= SUCCESS_TOLERANCE * max(1.0, float(np.linalg.norm(signal.entries)))
        successes += ok
        records.append(
            TrialRecord(
                trial=i,
                success=ok,
                l2_error=l2,
                sigma_k=best_k_term_error(signal.entries, k),
                iterations=result.iterations_used,
                residual=result.constraint_residual,
            )
        )
    return RecoveryTrialStats(
        trials=trials,
        successes=successes,
        success_rate=successes / trials,
        success_tolerance=SUCCESS_TOLERANCE,
        seed=seed,
        records=tuple(records),
    )
