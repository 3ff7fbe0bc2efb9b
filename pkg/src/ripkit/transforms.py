"""Isometry analysis of transformed sensing matrices.

Left products inherit a two-sided quadratic-form envelope from the extreme
eigenvalues of the left factor's Gram matrix; right products inherit one
from the per-support singular values of the right factor. Envelopes convert
to a symmetric isometry form by the optimal rescale ``c^2 = 2/(L+U)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import rip
from .linalg import EnsembleSpec, as_matrix, derive_seed, draw_ensemble, gram_eigenvalues, multiply

# Smallest Gram eigenvalue above which a left factor counts as full column rank.
RANK_TOLERANCE = 1e-10

# Fuzz allowed on deterministic inequality checks (pure roundoff).
SLACK_TOLERANCE = 1e-9


@dataclass(frozen=True)
class EnvelopeReport:
    """Two-sided quadratic-form envelope [lower, upper] for sparse inputs.

    ``rescale_c`` maps the envelope onto [1 - delta_effective,
    1 + delta_effective]; the isometry form is valid only when the lower
    end stays positive.
    """

    order: int
    lower: float
    upper: float
    rescale_c: float
    delta_effective: float
    rip_valid: bool


def envelope_from_bounds(order: int, lower: float, upper: float) -> EnvelopeReport:
    """Build an envelope report, including the optimal symmetric rescale."""
    if lower < 0.0 or lower > upper:
        raise ValueError(f"need 0 <= lower <= upper, got [{lower}, {upper}]")
    if upper <= 0.0:
        # Degenerate: the quadratic form vanishes identically.
        return EnvelopeReport(
            order=order, lower=lower, upper=upper, rescale_c=0.0, delta_effective=1.0, rip_valid=False
        )
    total = lower + upper
    delta_eff = (upper - lower) / total
    return EnvelopeReport(
        order=order,
        lower=lower,
        upper=upper,
        rescale_c=math.sqrt(2.0 / total),
        delta_effective=delta_eff,
        rip_valid=delta_eff < 1.0 and lower > 0.0,
    )


@dataclass(frozen=True)
class LeftProductAnalysis:
    """Envelope of a left product from the left factor's Gram spectrum.

    ``gram_spectrum`` holds the non-increasing eigenvalues of ``a.T @ a``
    (not singular values). A left factor with fewer rows than columns, or
    with a vanishing smallest Gram eigenvalue, kills the isometry property
    outright; that state is reported, not raised.
    """

    gram_spectrum: np.ndarray
    full_column_rank: bool
    envelope: EnvelopeReport
    failure_mode: str | None = None


def analyze_left_product(a, delta_k_phi: float, k: int) -> LeftProductAnalysis:
    """Envelope [sigma_min*(1-delta), sigma_max*(1+delta)] for a left product.

    ``delta_k_phi`` is the order-k isometry constant of the (right) sensing
    matrix the left factor multiplies.
    """
    a = as_matrix(a)
    if not 0.0 <= delta_k_phi < 1.0:
        raise ValueError(f"delta must lie in [0, 1), got {delta_k_phi}")
    if k < 1:
        raise ValueError("order must be at least 1")
    m, n = a.shape
    spectrum = gram_eigenvalues(a)
    sigma_max = float(spectrum[0])
    sigma_min = float(spectrum[-1])
    if m < n:
        full_rank = False
        failure = "fewer rows than columns"
    elif sigma_min <= RANK_TOLERANCE:
        full_rank = False
        failure = "rank deficient"
    else:
        full_rank = True
        failure = None
    envelope = envelope_from_bounds(k, sigma_min * (1.0 - delta_k_phi), sigma_max * (1.0 + delta_k_phi))
    if not full_rank and envelope.rip_valid:
        envelope = replace(envelope, rip_valid=False)
    return LeftProductAnalysis(
        gram_spectrum=spectrum, full_column_rank=full_rank, envelope=envelope, failure_mode=failure
    )


@dataclass(frozen=True)
class LeftEnvelopeCheck:
    """Per-support verification record for a left-product envelope."""

    order: int
    delta_phi: float
    sigma_min: float
    sigma_max: float
    lower: float
    upper: float
    worst_slack: float
    witness: rip.SupportSet
    passed: bool
    supports_examined: int


def verify_left_envelope(
    a, phi, k: int, budget: int = rip.DEFAULT_SUPPORT_BUDGET, workers: int = 1
) -> LeftEnvelopeCheck:
    """Check every restricted Gram eigenvalue of ``a @ phi`` against the envelope.

    Deterministic: given the exact order-k constant of ``phi``, every
    eigenvalue of a restricted Gram of the product must lie inside
    [sigma_min*(1-delta), sigma_max*(1+delta)]. Reports the worst slack and
    the support attaining it.
    """
    a = as_matrix(a)
    phi = as_matrix(phi)
    analysis = analyze_left_product(a, 0.0, k)
    if not analysis.full_column_rank:
        raise ValueError(f"left factor must have full column rank ({analysis.failure_mode})")
    sigma_max = float(analysis.gram_spectrum[0])
    sigma_min = float(analysis.gram_spectrum[-1])
    report = rip.exact_ric(phi, k, budget=budget, workers=workers)
    lower = sigma_min * (1.0 - report.delta)
    upper = sigma_max * (1.0 + report.delta)
    product = multiply(a, phi)

    worst = math.inf
    witness: rip.SupportSet = ()
    examined = 0

    def reduce_block(idx: np.ndarray):
        w = rip.block_gram_eigenvalues(product, idx)
        slack = np.minimum(w[:, 0] - lower, upper - w[:, -1])
        i = int(np.argmin(slack))
        return float(slack[i]), tuple(int(v) for v in idx[i]), idx.shape[0]

    for bslack, bwitness, count in rip.map_blocks(
        reduce_block, rip.support_blocks(product.shape[1], k), workers
    ):
        if bslack < worst:
            worst, witness = bslack, bwitness
        examined += count

    return LeftEnvelopeCheck(
        order=k,
        delta_phi=report.delta,
        sigma_min=sigma_min,
        sigma_max=sigma_max,
        lower=lower,
        upper=upper,
        worst_slack=worst,
        witness=witness,
        passed=worst >= -SLACK_TOLERANCE,
        supports_examined=examined,
    )


def support_singular_extremes(
    b: np.ndarray, k: int, budget: int = rip.DEFAULT_SUPPORT_BUDGET, workers: int = 1
) -> tuple[float, float, int]:
    """Global extreme singular values over all size-k column submatrices."""
    n_cols = b.shape[1]
    total = math.comb(n_cols, k)
    if total > budget:
        raise ValueError(
            f"enumerating C({n_cols},{k}) = {total} supports exceeds the budget of {budget}"
        )

    def reduce_block(idx: np.ndarray):
        sv = np.linalg.svd(rip.restricted_block(b, idx), compute_uv=False)
        return float(sv[:, -1].min()), float(sv[:, 0].max()), idx.shape[0]

    lam_min = math.inf
    lam_max = -math.inf
    examined = 0
    for bmin, bmax, count in rip.map_blocks(reduce_block, rip.support_blocks(n_cols, k), workers):
        lam_min = min(lam_min, bmin)
        lam_max = max(lam_max, bmax)
        examined += count
    return lam_min, lam_max, examined


@dataclass(frozen=True)
class RightProductAnalysis:
    """Envelope of a right product from per-support singular values."""

    order: int
    per_support_lambda_min: float
    per_support_lambda_max: float
    envelope: EnvelopeReport
    supports_examined: int


def analyze_right_product(
    b, delta_k_phi: float, k: int, budget: int = rip.DEFAULT_SUPPORT_BUDGET, workers: int = 1
) -> RightProductAnalysis:
    """Envelope [lam_min^2*(1-delta), lam_max^2*(1+delta)] for a right product.

    ``b`` is the N x q right factor (dictionary); supports of size k range
    over its q columns and must satisfy ``k < N``.
    """
    b = as_matrix(b)
    if not 0.0 <= delta_k_phi < 1.0:
        raise ValueError(f"delta must lie in [0, 1), got {delta_k_phi}")
    n_rows, q = b.shape
    if not 1 <= k <= q:
        raise ValueError(f"order must satisfy 1 <= k <= {q}, got {k}")
    if k >= n_rows:
        raise ValueError(
            f"order k={k} must stay below the dictionary's row dimension {n_rows}"
        )
    lam_min, lam_max, examined = support_singular_extremes(b, k, budget=budget, workers=workers)
    envelope = envelope_from_bounds(
        k, lam_min * lam_min * (1.0 - delta_k_phi), lam_max * lam_max * (1.0 + delta_k_phi)
    )
    return RightProductAnalysis(
        order=k,
        per_support_lambda_min=lam_min,
        per_support_lambda_max=lam_max,
        envelope=envelope,
        supports_examined=examined,
    )


@dataclass(frozen=True)
class ProbabilityBound:
    """Union-bound success probability over all size-k supports."""

    q: int
    k: int
    p: float
    bound: float
    clamped: float
    vacuous: bool


def union_probability(q: int, k: int, p: float) -> ProbabilityBound:
    """Probability bound ``1 - C(q, k)*(1 - p)``, clamped to [0, 1].

    The binomial coefficient is evaluated in log space, so large q and k
    degrade gracefully to a vacuous (clamped) bound instead of overflowing.
    """
    if not 1 <= k <= q:
        raise ValueError(f"need 1 <= k <= q, got k={k}, q={q}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    if p == 1.0:
        product = 0.0
    else:
        log_c = math.lgamma(q + 1) - math.lgamma(k + 1) - math.lgamma(q - k + 1)
        log_product = log_c + math.log1p(-p)
        product = math.inf if log_product > 700.0 else math.exp(log_product)
    bound = 1.0 - product
    return ProbabilityBound(
        q=q, k=k, p=p, bound=bound, clamped=max(bound, 0.0), vacuous=bound <= 0.0
    )


@dataclass(frozen=True)
class DictionaryBound:
    """Composed isometry-constant bound for a sensing matrix times a dictionary.

    ``admissible`` follows the printed open window
    ``0 < delta_b < 2/(1 + delta_phi)``; a dictionary with exactly
    orthonormal restricted columns (delta_b == 0) falls outside the window
    even though the bound then degenerates harmlessly to ``delta_phi``.
    """

    delta_b: float
    delta_phi: float
    bound: float
    admissible: bool


def dictionary_bound(delta_b: float, delta_phi: float) -> DictionaryBound:
    """Bound ``delta_b + delta_phi*(1 + delta_b)`` with its admissibility window."""
    if delta_b < 0.0:
        raise ValueError("dictionary constant must be nonnegative")
    if not 0.0 <= delta_phi < 1.0:
        raise ValueError(f"sensing constant must lie in [0, 1), got {delta_phi}")
    return DictionaryBound(
        delta_b=delta_b,
        delta_phi=delta_phi,
        bound=delta_b + delta_phi * (1.0 + delta_b),
        admissible=0.0 < delta_b < 2.0 / (1.0 + delta_phi),
    )


@dataclass(frozen=True)
class LambdaWindowCheck:
    """Verification that per-support singular values sit in the delta window."""

    order: int
    delta_b: float
    lambda_min: float
    lambda_max: float
    worst_slack: float
    passed: bool
    supports_examined: int


def lambda_window_check(
    b, k: int, budget: int = rip.DEFAULT_SUPPORT_BUDGET, workers: int = 1
) -> LambdaWindowCheck:
    """Check ``1 - delta_k <= lam_min^2 <= lam_max^2 <= 1 + delta_k`` for ``b``.

    The exact constant comes from restricted Gram eigenvalues and the
    lambdas from per-support singular values, so the check exercises two
    numerical routes to the same window.
    """
    b = as_matrix(b)
    report = rip.exact_ric(b, k, budget=budget, workers=workers)
    lam_min, lam_max, examined = support_singular_extremes(b, k, budget=budget, workers=workers)
    slack_lower = lam_min * lam_min - (1.0 - report.delta)
    slack_upper = (1.0 + report.delta) - lam_max * lam_max
    worst = min(slack_lower, slack_upper)
    return LambdaWindowCheck(
        order=k,
        delta_b=report.delta,
        lambda_min=lam_min,
        lambda_max=lam_max,
        worst_slack=worst,
        passed=worst >= -SLACK_TOLERANCE,
        supports_examined=examined,
    )


@dataclass(frozen=True)
class DictionaryTrial:
    """One draw of the sensing matrix in a dictionary experiment."""

    trial: int
    delta_phi: float
    delta_phi_b: float
    bound: float
    holds: bool


@dataclass(frozen=True)
class DictionaryExperimentResult:
    """Empirical frequency of the composed dictionary bound."""

    order: int
    delta_b: float
    trials: int
    holds: int
    pass_fraction: float
    half_width: float
    seed: int
    records: tuple[DictionaryTrial, ...]


def dictionary_experiment(
    phi_spec: EnsembleSpec,
    b,
    k: int,
    trials: int,
    seed: int,
    budget: int = rip.DEFAULT_SUPPORT_BUDGET,
    workers: int = 1,
) -> DictionaryExperimentResult:
    """Empirical pass rate of the composed bound over random sensing draws.

    Per trial: draw the sensing matrix, compute exact order-k constants of
    the sensing matrix and of its product with the dictionary, and test
    the product constant against the composed bound. The bound is
    distributional, so the result is a frequency, never a per-trial
    guarantee.
    """
    b = as_matrix(b)
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if phi_spec.cols != b.shape[0]:
        raise ValueError(
            f"sensing spec has {phi_spec.cols} columns but dictionary has {b.shape[0]} rows"
        )
    delta_b = rip.exact_ric(b, k, budget=budget, workers=workers).delta
    records = []
    holds = 0
    for i in range(trials):
        phi = draw_ensemble(replace(phi_spec, seed=derive_seed(seed, i)))
        delta_phi = rip.exact_ric(phi, k, budget=budget, workers=workers).delta
        delta_phi_b = rip.exact_ric(multiply(phi, b), k, budget=budget, workers=workers).delta
        # Same algebra as dictionary_bound; a raw draw may land at
        # delta_phi >= 1, where the formula is still well-defined arithmetic.
        bound = delta_b + delta_phi * (1.0 + delta_b)
        ok = delta_phi_b <= bound + 1e-12
        holds += ok
        records.append(
            DictionaryTrial(trial=i, delta_phi=delta_phi, delta_phi_b=delta_phi_b, bound=bound, holds=ok)
        )
    fraction = holds / trials
    half_width = 1.96 * math.sqrt(fraction * (1.0 - fraction) / trials)
    return DictionaryExperimentResult(
        order=k,
        delta_b=delta_b,
        trials=trials,
        holds=holds,
        pass_fraction=fraction,
        half_width=half_width,
        seed=seed,
        records=tuple(records),
    )
