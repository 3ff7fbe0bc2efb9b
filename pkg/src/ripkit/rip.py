"""Exact and sampled restricted isometry constants by support enumeration.

The order-k isometry constant of a matrix is governed by the extreme
eigenvalues of the Gram matrices of all k-column submatrices. Extremes
over supports of size exactly k match extremes over size at most k
(eigenvalue interlacing), so enumeration runs over size-k supports only.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .linalg import GRAM_EIG_CLAMP, as_matrix

DEFAULT_SUPPORT_BUDGET = 10_000_000

# Supports are evaluated in fixed-size lexicographic blocks; the block size
# never depends on the worker count, so reductions are schedule-invariant.
BLOCK_SIZE = 2048

SupportSet = tuple[int, ...]


def validate_support(t, n_cols: int) -> SupportSet:
    """Check that ``t`` is a strictly increasing index tuple within range."""
    idx = tuple(int(i) for i in t)
    if len(idx) < 1:
        raise ValueError("support must contain at least one index")
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise ValueError(f"support indices must be strictly increasing, got {idx}")
    if idx[0] < 0 or idx[-1] >= n_cols:
        raise ValueError(f"support {idx} out of range for {n_cols} columns")
    return idx


def enumerate_supports(n_cols: int, k: int):
    """Yield all size-k column supports in lexicographic order."""
    if not 1 <= k <= n_cols:
        raise ValueError(f"support size must satisfy 1 <= k <= {n_cols}, got {k}")
    return itertools.combinations(range(n_cols), k)


def support_blocks(n_cols: int, k: int, block: int = BLOCK_SIZE):
    """Yield lex-ordered supports as (block, k) index arrays.

    Contiguous lexicographic ranges, suitable for handing to parallel
    workers with a deterministic in-order reduction.
    """
    it = enumerate_supports(n_cols, k)
    while True:
        chunk = list(itertools.islice(it, block))
        if not chunk:
            return
        yield np.asarray(chunk, dtype=np.intp)


def restrict_columns(m, t) -> np.ndarray:
    """Submatrix of ``m`` keeping the columns listed in support ``t``."""
    m = as_matrix(m)
    idx = validate_support(t, m.shape[1])
    return m[:, list(idx)].copy()


def restricted_block(m: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Stack of restricted submatrices, shape (block, rows, k)."""
    return np.moveaxis(m[:, idx], 0, 1)


def block_gram_eigenvalues(m: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Ascending Gram eigenvalues for every support in ``idx``, shape (block, k)."""
    cols = restricted_block(m, idx)
    grams = np.einsum("bnk,bnl->bkl", cols, cols)
    w = np.linalg.eigvalsh(grams)
    w[(w < 0.0) & (w >= -GRAM_EIG_CLAMP)] = 0.0
    return w


@dataclass(frozen=True)
class RipReport:
    """Exact restricted isometry data for one matrix and order k."""

    order: int
    delta: float
    min_eigenvalue: float
    max_eigenvalue: float
    witness_min: SupportSet
    witness_max: SupportSet
    supports_examined: int

    def __post_init__(self):
        if self.min_eigenvalue > self.max_eigenvalue:
            raise ValueError("min eigenvalue exceeds max eigenvalue")
        expected = max(self.max_eigenvalue - 1.0, 1.0 - self.min_eigenvalue)
        if self.delta != expected:
            raise ValueError(f"delta {self.delta!r} inconsistent with eigenvalues (expected {expected!r})")

    def to_text_block(self) -> str:
        return "\n".join(
            [
                f"order={self.order}",
                f"delta={self.delta!r}",
                f"min_eig={self.min_eigenvalue!r}",
                f"max_eig={self.max_eigenvalue!r}",
                f"witness_min={format_support(self.witness_min)}",
                f"witness_max={format_support(self.witness_max)}",
                f"supports_examined={self.supports_examined}",
            ]
        )

    def to_csv_row(self) -> list:
        return [
            self.order,
            self.delta,
            self.min_eigenvalue,
            self.max_eigenvalue,
            format_support(self.witness_min),
            format_support(self.witness_max),
            self.supports_examined,
        ]


RIP_CSV_COLUMNS = [
    "order",
    "delta",
    "min_eig",
    "max_eig",
    "witness_min",
    "witness_max",
    "supports_examined",
]


def format_support(t: SupportSet) -> str:
    return "+".join(str(i) for i in t)


def parse_support(text: str) -> SupportSet:
    return tuple(int(p) for p in text.split("+"))


@dataclass(frozen=True)
class RicEstimate:
    """Sampled lower bound on the order-k isometry constant."""

    order: int
    delta_lower_bound: float
    trials: int
    seed: int


def _check_budget(n_cols: int, k: int, budget: int) -> int:
    total = math.comb(n_cols, k)
    if total > budget:
        raise ValueError(
            f"enumerating C({n_cols},{k}) = {total} supports exceeds the budget of "
            f"{budget}; use estimate_ric or raise the budget"
        )
    return total


def map_blocks(func, blocks, workers: int = 1):
    """Apply ``func`` to each block, preserving block order.

    With ``workers > 1`` the blocks are evaluated on a thread pool; the
    in-order reduction makes results independent of the worker count.
    """
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            yield from pool.map(func, blocks)
    else:
        yield from map(func, blocks)


def exact_ric(
    m,
    k: int,
    budget: int = DEFAULT_SUPPORT_BUDGET,
    workers: int = 1,
    block: int = BLOCK_SIZE,
) -> RipReport:
    """Exact order-k restricted isometry constant by full support enumeration.

    Scans every size-k column support, computing the extreme eigenvalues of
    the restricted Gram matrices, and reports
    ``delta = max(max_eig - 1, 1 - min_eig)``. Witness supports are the
    lexicographically smallest attaining the extremes, regardless of block
    size or worker count.
    """
    m = as_matrix(m)
    n_cols = m.shape[1]
    if not 1 <= k <= n_cols:
        raise ValueError(f"order must satisfy 1 <= k <= {n_cols}, got {k}")
    total = _check_budget(n_cols, k, budget)

    def reduce_block(idx: np.ndarray):
        w = block_gram_eigenvalues(m, idx)
        wmin = w[:, 0]
        wmax = w[:, -1]
        i_min = int(np.argmin(wmin))
        i_max = int(np.argmax(wmax))
        return (
            float(wmin[i_min]),
            tuple(int(v) for v in idx[i_min]),
            float(wmax[i_max]),
            tuple(int(v) for v in idx[i_max]),
            idx.shape[0],
        )

    min_eig = math.inf
    max_eig = -math.inf
    witness_min: SupportSet = ()
    witness_max: SupportSet = ()
    examined = 0
    for bmin, wmin_t, bmax, wmax_t, count in map_blocks(
        reduce_block, support_blocks(n_cols, k, block), workers
    ):
        # Strict comparisons keep the first (lex-smallest) witness on ties.
        if bmin < min_eig:
            min_eig, witness_min = bmin, wmin_t
        if bmax > max_eig:
            max_eig, witness_max = bmax, wmax_t
        examined += count
    assert examined == total

    delta = max(max_eig - 1.0, 1.0 - min_eig)
    return RipReport(
        order=k,
        delta=delta,
        min_eigenvalue=min_eig,
        max_eigenvalue=max_eig,
        witness_min=witness_min,
        witness_max=witness_max,
        supports_examined=examined,
    )


def estimate_ric(m, k: int, trials: int, seed: int) -> RicEstimate:
    """Monte Carlo lower bound on the order-k isometry constant.

    Takes the maximum per-support delta over ``trials`` uniformly sampled
    supports; always at most the exact constant.
    """
    m = as_matrix(m)
    n_cols = m.shape[1]
    if not 1 <= k <= n_cols:
        raise ValueError(f"order must satisfy 1 <= k <= {n_cols}, got {k}")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    samples = np.empty((trials, k), dtype=np.intp)
    for i in range(trials):
        samples[i] = np.sort(rng.choice(n_cols, size=k, replace=False))
    best = -math.inf
    for start in range(0, trials, BLOCK_SIZE):
        w = block_gram_eigenvalues(m, samples[start : start + BLOCK_SIZE])
        delta_per = np.maximum(w[:, -1] - 1.0, 1.0 - w[:, 0])
        best = max(best, float(delta_per.max()))
    return RicEstimate(order=k, delta_lower_bound=best, trials=trials, seed=seed)


def scaled_ric(report: RipReport, c: float) -> RipReport:
    """Isometry report of the rescaled matrix ``c * m`` from the report of ``m``.

    Eigenvalues of restricted Grams scale by c^2, so the extreme values and
    witnesses carry over; the constant itself does not scale linearly, which
    is why rescaling can break the isometry property.
    """
    if c == 0.0:
        raise ValueError("scale factor must be nonzero")
    c2 = c * c
    min_eig = c2 * report.min_eigenvalue
    max_eig = c2 * report.max_eigenvalue
    return RipReport(
        order=report.order,
        delta=max(max_eig - 1.0, 1.0 - min_eig),
        min_eigenvalue=min_eig,
        max_eigenvalue=max_eig,
        witness_min=report.witness_min,
        witness_max=report.witness_max,
        supports_examined=report.supports_examined,
    )
