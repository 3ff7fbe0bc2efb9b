"""Dense real linear algebra and seeded random matrix ensembles.

Matrices are plain 2-D float64 ``numpy`` arrays throughout the package;
:func:`as_matrix` is the shared validation helper. All randomness flows
through explicit integer seeds so every experiment is reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

GAUSSIAN = "gaussian"
RADEMACHER = "rademacher"
ENSEMBLE_KINDS = (GAUSSIAN, RADEMACHER)

# Eigenvalues of a Gram matrix in [-GRAM_EIG_CLAMP, 0) are roundoff; clamp to 0.
GRAM_EIG_CLAMP = 1e-10

_MAX_SEED = 2**64


def as_matrix(a) -> np.ndarray:
    """Validate and return ``a`` as a 2-D float64 array with finite entries."""
    m = np.ascontiguousarray(a, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got array of ndim {m.ndim}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"matrix must be nonempty, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError("matrix entries must be finite")
    return m


def as_vector(v, length: int | None = None) -> np.ndarray:
    """Validate and return ``v`` as a 1-D float64 array with finite entries."""
    x = np.asarray(v, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("vector must be nonempty")
    if not np.isfinite(x).all():
        raise ValueError("vector entries must be finite")
    if length is not None and x.size != length:
        raise ValueError(f"expected a vector of length {length}, got {x.size}")
    return x


def multiply(a, b) -> np.ndarray:
    """Matrix product ``a @ b`` with shape checking."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(
            f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}: "
            "inner dimensions differ"
        )
    out = a @ b
    if not np.isfinite(out).all():
        raise ValueError("matrix product overflowed to non-finite entries")
    return out


def gram_eigenvalues(m) -> np.ndarray:
    """Eigenvalues of ``m.T @ m``, sorted non-increasing.

    Tiny negative values (roundoff on a positive semidefinite matrix) are
    clamped to zero.
    """
    m = as_matrix(m)
    gram = m.T @ m
    w = np.linalg.eigvalsh(gram)[::-1].copy()
    w[(w < 0.0) & (w >= -GRAM_EIG_CLAMP)] = 0.0
    return w


@dataclass(frozen=True)
class SvdFactorization:
    """Full singular value decomposition ``m = U @ diag @ V.T``.

    ``left_factor`` is rows x rows orthogonal, ``right_factor`` is
    cols x cols orthogonal, and ``singular_values`` has min(rows, cols)
    non-increasing nonnegative entries.
    """

    left_factor: np.ndarray
    singular_values: np.ndarray
    right_factor: np.ndarray

    def reconstruct(self) -> np.ndarray:
        r = self.left_factor.shape[0]
        s = self.right_factor.shape[0]
        d = np.zeros((r, s))
        n = self.singular_values.size
        d[:n, :n] = np.diag(self.singular_values)
        return self.left_factor @ d @ self.right_factor.T


def svd(m) -> SvdFactorization:
    """Full SVD of a dense matrix."""
    m = as_matrix(m)
    u, s, vh = np.linalg.svd(m, full_matrices=True)
    return SvdFactorization(left_factor=u, singular_values=s, right_factor=vh.T)


@dataclass(frozen=True)
class EnsembleSpec:
    """Description of a random matrix ensemble draw.

    ``gaussian`` entries are N(0, 1/rows); ``rademacher`` entries are
    +-1/sqrt(rows) with equal probability. The draw is a pure function of
    the spec, seed included.
    """

    kind: str
    rows: int
    cols: int
    seed: int

    def __post_init__(self):
        if self.kind not in ENSEMBLE_KINDS:
            raise ValueError(f"unknown ensemble kind {self.kind!r}; expected one of {ENSEMBLE_KINDS}")
        if self.rows < 1 or self.cols < 1:
            raise ValueError("ensemble dimensions must be positive")
        if not (0 <= self.seed < _MAX_SEED):
            raise ValueError("seed must be an unsigned 64-bit integer")


def draw_ensemble(spec: EnsembleSpec) -> np.ndarray:
    """Draw the matrix described by ``spec``. Deterministic given the seed."""
    rng = np.random.default_rng(spec.seed)
    scale = 1.0 / math.sqrt(spec.rows)
    if spec.kind == GAUSSIAN:
        return rng.normal(0.0, scale, size=(spec.rows, spec.cols))
    signs = rng.integers(0, 2, size=(spec.rows, spec.cols)) * 2 - 1
    return signs * scale


def derive_seed(seed: int, *path: int) -> int:
    """Deterministic 64-bit child seed for Monte Carlo trial ``path``.

    Any parallel schedule that assigns trial ``i`` the seed
    ``derive_seed(seed, i, ...)`` reproduces the sequential results.
    """
    ss = np.random.SeedSequence((seed,) + tuple(path))
    return int(ss.generate_state(1, np.uint64)[0])


def unit_vector(rng: np.random.Generator, length: int) -> np.ndarray:
    """Uniform random point on the unit sphere in R^length."""
    while True:
        g = rng.standard_normal(length)
        nrm = float(np.linalg.norm(g))
        if nrm > 0.0:
            return g / nrm


def write_matrix(m, path) -> None:
    """Write a matrix in the plain text format (header line, then rows).

    Line 1 is ``<rows> <cols>``; each following line holds one row with
    space-separated decimals at 17 significant digits (exact round-trip).
    """
    m = as_matrix(m)
    rows, cols = m.shape
    with open(path, "w", newline="\n") as fh:
        fh.write(f"{rows} {cols}\n")
        for i in range(rows):
            fh.write(" ".join(f"{v:.17g}" for v in m[i]) + "\n")


def read_matrix(path) -> np.ndarray:
    """Read a matrix written by :func:`write_matrix`; '#' lines are skipped."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh]
    content = [ln for ln in lines if ln and not ln.startswith("#")]
    if not content:
        raise ValueError(f"{path}: no matrix data found")
    header = content[0].split()
    if len(header) != 2:
        raise ValueError(f"{path}: header must be '<rows> <cols>', got {content[0]!r}")
    try:
        rows, cols = int(header[0]), int(header[1])
    except ValueError as exc:
        raise ValueError(f"{path}: malformed header {content[0]!r}") from exc
    if rows < 1 or cols < 1:
        raise ValueError(f"{path}: dimensions must be positive, got {rows}x{cols}")
    if len(content) - 1 != rows:
        raise ValueError(f"{path}: expected {rows} data rows, found {len(content) - 1}")
    data = np.empty((rows, cols))
    for i, line in enumerate(content[1:]):
        parts = line.split()
        if len(parts) != cols:
            raise ValueError(f"{path}: row {i} has {len(parts)} entries, expected {cols}")
        try:
            data[i] = [float(p) for p in parts]
        except ValueError as exc:
            raise ValueError(f"{path}: row {i} has a non-numeric entry") from exc
    return as_matrix(data)
