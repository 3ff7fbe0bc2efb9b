"""Concentration-of-measure constants, tail experiments, and dimensioning.

The tail constant for the gaussian and rademacher ensembles is
``c0(eps) = eps^2/4 - eps^3/6`` and the two-sided tail of the squared
image norm is bounded by ``2*exp(-n*c0(eps))``. Composition of two
concentrating random factors degrades the level to
``eps3 = eps + eps1*(1 + eps)`` with an exponent no better than
``min(c0, c0') - ln(2)/m``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .linalg import EnsembleSpec, derive_seed, draw_ensemble, unit_vector

# Hypothesis ceiling for composing two concentration levels.
COMPOSITION_EPS_MAX = 1.0 / 3.0


def _check_epsilon(epsilon: float) -> float:
    epsilon = float(epsilon)
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    return epsilon


def c0_of(epsilon: float) -> float:
    """Tail exponent constant ``eps^2/4 - eps^3/6``; positive on (0, 1)."""
    epsilon = _check_epsilon(epsilon)
    return epsilon * epsilon / 4.0 - epsilon**3 / 6.0


@dataclass(frozen=True)
class ConcentrationParams:
    """An epsilon level together with its tail exponent constant."""

    epsilon: float
    c0: float

    def __post_init__(self):
        _check_epsilon(self.epsilon)
        if abs(self.c0 - c0_of(self.epsilon)) > 1e-15:
            raise ValueError("c0 inconsistent with epsilon")

    @classmethod
    def from_epsilon(cls, epsilon: float) -> "ConcentrationParams":
        return cls(epsilon=float(epsilon), c0=c0_of(epsilon))


def tail_bound(n: int, epsilon: float) -> float:
    """Theoretical two-sided tail bound ``2*exp(-n*c0(epsilon))``."""
    if n < 1:
        raise ValueError(f"row count must be at least 1, got {n}")
    return 2.0 * math.exp(-n * c0_of(epsilon))


def rip_event_probability(n: int, epsilon: float) -> float:
    """Default per-event success probability ``1 - tail_bound(n, epsilon)``, floored at 0."""
    return max(0.0, 1.0 - tail_bound(n, epsilon))


TAIL_CSV_COLUMNS = [
    "epsilon",
    "rows",
    "trials",
    "failures",
    "empirical_probability",
    "theoretical_bound",
    "seed",
]


@dataclass(frozen=True)
class TailEstimate:
    """Monte Carlo tail frequency against the theoretical bound."""

    epsilon: float
    rows: int
    trials: int
    failures: int
    empirical_probability: float
    theoretical_bound: float
    seed: int

    def to_csv_row(self) -> list:
        return [
            self.epsilon,
            self.rows,
            self.trials,
            self.failures,
            self.empirical_probability,
            self.theoretical_bound,
            self.seed,
        ]


def estimate_tail(spec: EnsembleSpec, epsilon: float, trials: int, seed: int) -> TailEstimate:
    """Empirical frequency of ``| ||Mx||^2 - ||x||^2 | >= eps * ||x||^2``.

    Each trial draws a fresh matrix from ``spec`` and an independent uniform
    unit test vector (one norm suffices, the event is homogeneous in x).
    Per-trial seeds derive from ``(seed, trial)``; ``spec.seed`` is ignored.
    """
    epsilon = _check_epsilon(epsilon)
    if trials < 1:
        raise ValueError("trials must be at least 1")
    failures = 0
    for i in range(trials):
        phi = draw_ensemble(replace(spec, seed=derive_seed(seed, i, 0)))
        rng = np.random.default_rng(np.random.SeedSequence((seed, i, 1)))
        x = unit_vector(rng, spec.cols)
        nx = float(x @ x)
        img = phi @ x
        if abs(float(img @ img) - nx) >= epsilon * nx:
            failures += 1
    return TailEstimate(
        epsilon=epsilon,
        rows=spec.rows,
        trials=trials,
        failures=failures,
        empirical_probability=failures / trials,
        theoretical_bound=tail_bound(spec.rows, epsilon),
        seed=seed,
    )


@dataclass(frozen=True)
class CompositionParams:
    """Concentration level of a product of two concentrating random matrices."""

    epsilon: float
    epsilon1: float
    epsilon3: float
    c0_prime_bound: float | None = None
    rows_outer: int | None = None

    def __post_init__(self):
        for name, value in (("epsilon", self.epsilon), ("epsilon1", self.epsilon1)):
            if not 0.0 < value < COMPOSITION_EPS_MAX:
                raise ValueError(f"{name} must lie in (0, 1/3), got {value}")
        expected = self.epsilon + self.epsilon1 * (1.0 + self.epsilon)
        if abs(self.epsilon3 - expected) > 1e-15:
            raise ValueError("epsilon3 inconsistent with epsilon and epsilon1")

    @property
    def vacuous(self) -> bool:
        """True when the composed exponent estimate gives no information."""
        return self.c0_prime_bound is not None and self.c0_prime_bound <= 0.0

    def to_csv_row(self) -> list:
        return [
            self.epsilon,
            self.epsilon1,
            self.epsilon3,
            self.c0_prime_bound if self.c0_prime_bound is not None else "",
            self.rows_outer if self.rows_outer is not None else "",
        ]


def compose_epsilons(epsilon: float, epsilon1: float, rows_outer: int | None = None) -> CompositionParams:
    """Composed concentration level ``eps + eps1*(1 + eps)``.

    Both inputs must lie strictly inside (0, 1/3), which keeps the composed
    level below 1. When ``rows_outer`` is given, the exponent estimate of
    :func:`compose_exponent` is attached.
    """
    for name, value in (("epsilon", epsilon), ("epsilon1", epsilon1)):
        if not 0.0 < value < COMPOSITION_EPS_MAX:
            raise ValueError(f"composition requires 0 < {name} < 1/3, got {value}")
    epsilon3 = epsilon + epsilon1 * (1.0 + epsilon)
    c0_prime = None
    if rows_outer is not None:
        c0_prime = compose_exponent(c0_of(epsilon), c0_of(epsilon1), rows_outer)
    return CompositionParams(
        epsilon=epsilon,
        epsilon1=epsilon1,
        epsilon3=epsilon3,
        c0_prime_bound=c0_prime,
        rows_outer=rows_outer,
    )


def compose_exponent(c0_eps: float, c0_eps1: float, m: int) -> float:
    """Rough composed-exponent estimate ``min(c0, c0') - ln(2)/m``.

    Intended for an outer factor with ``m`` rows, ``m`` at most the inner
    row count. May be negative for tiny ``m``, in which case the resulting
    tail bound is vacuous; the value is reported as-is.
    """
    if m < 1:
        raise ValueError("row count must be at least 1")
    if c0_eps <= 0.0 or c0_eps1 <= 0.0:
        raise ValueError("exponent constants must be positive")
    return min(c0_eps, c0_eps1) - math.log(2.0) / m


@dataclass(frozen=True)
class ComposedTailResult:
    """Coupled Monte Carlo tails for a product of two random matrices.

    All three failure counts come from the same draws (outer matrix, inner
    matrix, test vector), so by the triangle structure of the composition
    the composed count never exceeds the sum of the other two.
    """

    params: CompositionParams
    trials: int
    failures_inner: int
    failures_outer: int
    failures_composed: int
    seed: int

    @property
    def tail_inner(self) -> float:
        return self.failures_inner / self.trials

    @property
    def tail_outer(self) -> float:
        return self.failures_outer / self.trials

    @property
    def tail_composed(self) -> float:
        return self.failures_composed / self.trials


def composed_tail_experiment(
    outer_spec: EnsembleSpec,
    inner_spec: EnsembleSpec,
    epsilon: float,
    epsilon1: float,
    trials: int,
    seed: int,
) -> ComposedTailResult:
    """Monte Carlo check of the composed concentration level.

    Per trial, draws the inner matrix (n x N), the outer matrix (m x n) and
    a unit vector x, and counts the three tail events: inner at ``epsilon``
    on x, outer at ``epsilon1`` on the image of x, and the product at
    ``epsilon3`` on x.
    """
    if outer_spec.cols != inner_spec.rows:
        raise ValueError(
            f"outer spec has {outer_spec.cols} columns but inner spec has {inner_spec.rows} rows"
        )
    if trials < 1:
        raise ValueError("trials must be at least 1")
    params = compose_epsilons(epsilon, epsilon1, rows_outer=outer_spec.rows)
    failures_inner = failures_outer = failures_composed = 0
    for i in range(trials):
        a = draw_ensemble(replace(outer_spec, seed=derive_seed(seed, i, 0)))
        phi = draw_ensemble(replace(inner_spec, seed=derive_seed(seed, i, 1)))
        rng = np.random.default_rng(np.random.SeedSequence((seed, i, 2)))
        x = unit_vector(rng, inner_spec.cols)
        nx = float(x @ x)
        y = phi @ x
        ny = float(y @ y)
        z = a @ y
        nz = float(z @ z)
        if abs(ny - nx) >= epsilon * nx:
            failures_inner += 1
        if ny > 0.0 and abs(nz - ny) >= epsilon1 * ny:
            failures_outer += 1
        if abs(nz - nx) >= params.epsilon3 * nx:
            failures_composed += 1
    return ComposedTailResult(
        params=params,
        trials=trials,
        failures_inner=failures_inner,
        failures_outer=failures_outer,
        failures_composed=failures_composed,
        seed=seed,
    )


def max_order(n: int, big_n: int, c1: float) -> int:
    """Largest sparsity order k with ``k <= c1 * n / ln(N/k)``, or 0 if none.

    Exhaustive scan over ``k = 1 .. min(n, N-1)``. The edge ``k = N`` (only
    reachable when ``n == N``) makes the log vanish and is treated as
    vacuously feasible.
    """
    if not 1 <= n <= big_n:
        raise ValueError(f"need 1 <= n <= N, got n={n}, N={big_n}")
    if c1 <= 0.0:
        raise ValueError("c1 must be positive")
    best = 0
    for k in range(1, min(n, big_n - 1) + 1):
        if k * math.log(big_n / k) <= c1 * n:
            best = k
    if n == big_n:
        best = big_n
    return best


@dataclass(frozen=True)
class DimensioningParams:
    """Inputs for the minimum-row-count bound of a random sensing matrix."""

    big_n: int
    k: int
    delta: float
    t: float
    c_cap: float = 1.0
    c1: float = 0.5

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("sparsity k must be at least 1")
        if self.big_n < self.k:
            raise ValueError("signal length N must be at least k")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("target delta must lie in (0, 1)")
        if self.t <= 0.0:
            raise ValueError("tail parameter t must be positive")
        if self.c_cap <= 0.0 or self.c1 <= 0.0:
            raise ValueError("constants must be positive")


@dataclass(frozen=True)
class RequiredRows:
    """Minimum row counts for both circulating variants of the bound.

    ``rows`` scales the dictionary-geometry term ``ln(e*(1 + 12/delta))``
    by the sparsity k (the corrected form); ``rows_unweighted_variant``
    adds that term once. Both are labeled because published statements of
    the bound disagree on the factor.
    """

    rows: int
    rows_unweighted_variant: int
    rhs: float
    rhs_unweighted: float


def required_rows(params: DimensioningParams) -> RequiredRows:
    """Smallest n with ``n >= C*delta^-2*[k*(ln(N/k) + ln(e(1+12/delta))) + ln 2 + t]``.

    Logs are natural. The unweighted variant replaces the bracket by
    ``k*ln(N/k) + ln(e(1+12/delta)) + ln 2 + t``.
    """
    geom = math.log(math.e * (1.0 + 12.0 / params.delta))
    log_ratio = math.log(params.big_n / params.k)
    lead = params.c_cap / (params.delta * params.delta)
    rhs = lead * (params.k * (log_ratio + geom) + math.log(2.0) + params.t)
    rhs_unweighted = lead * (params.k * log_ratio + geom + math.log(2.0) + params.t)
    return RequiredRows(
        rows=math.ceil(rhs),
        rows_unweighted_variant=math.ceil(rhs_unweighted),
        rhs=rhs,
        rhs_unweighted=rhs_unweighted,
    )
