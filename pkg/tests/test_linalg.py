import numpy as np
import pytest

from ripkit import linalg
from ripkit.linalg import EnsembleSpec, as_matrix, draw_ensemble, gram_eigenvalues, multiply, svd

from oracles import bisection_sym_eigs, naive_matmul


def test_as_matrix_rejects_bad_input():
    with pytest.raises(ValueError):
        as_matrix([1.0, 2.0])
    with pytest.raises(ValueError):
        as_matrix([[np.nan, 1.0]])
    with pytest.raises(ValueError):
        as_matrix(np.empty((0, 3)))


def test_multiply_identity():
    rng = np.random.default_rng(0)
    m = rng.normal(size=(3, 5))
    assert np.array_equal(multiply(np.eye(3), m), m)


def test_multiply_scalar():
    out = multiply([[2.0]], [[3.0]])
    assert out.shape == (1, 1)
    assert out[0, 0] == 6.0


def test_multiply_against_naive_oracle():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(4, 3))
    b = rng.normal(size=(3, 5))
    assert np.abs(multiply(a, b) - naive_matmul(a, b)).max() <= 1e-12


def test_multiply_shape_mismatch():
    with pytest.raises(ValueError, match="inner dimensions"):
        multiply(np.ones((2, 3)), np.ones((2, 3)))


@pytest.mark.parametrize("seed", range(10))
def test_multiply_associative(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(4, 6))
    b = rng.normal(size=(6, 3))
    c = rng.normal(size=(3, 5))
    left = multiply(multiply(a, b), c)
    right = multiply(a, multiply(b, c))
    assert np.abs(left - right).max() <= 1e-10


def test_gram_eigenvalues_identity():
    assert np.allclose(gram_eigenvalues(np.eye(4)), 1.0, atol=0)


def test_gram_eigenvalues_diagonal():
    w = gram_eigenvalues(np.diag([3.0, 2.0]))
    assert w.tolist() == [9.0, 4.0]


def test_gram_eigenvalues_against_bisection_oracle():
    rng = np.random.default_rng(2)
    m = rng.normal(size=(6, 4))
    w = gram_eigenvalues(m)
    oracle = bisection_sym_eigs(m.T @ m)
    assert np.abs(w - oracle).max() <= 1e-8


def test_gram_eigenvalues_trace_identity():
    rng = np.random.default_rng(3)
    for _ in range(20):
        m = rng.normal(size=rng.integers(1, 9, size=2))
        w = gram_eigenvalues(m)
        assert w.size == m.shape[1]
        assert np.all(np.diff(w) <= 0)
        assert abs(w.sum() - np.sum(m * m)) <= 1e-9 * max(1.0, np.sum(m * m))


def test_svd_orthogonal_input():
    rng = np.random.default_rng(4)
    q, _ = np.linalg.qr(rng.normal(size=(5, 5)))
    fact = svd(q)
    assert np.abs(fact.singular_values - 1.0).max() <= 1e-10


def test_svd_diagonal():
    fact = svd(np.diag([3.0, 2.0]))
    assert np.allclose(fact.singular_values, [3.0, 2.0], atol=1e-12)


def test_svd_matches_gram_eigenvalues():
    rng = np.random.default_rng(5)
    m = rng.normal(size=(5, 3))
    fact = svd(m)
    assert np.abs(fact.singular_values**2 - gram_eigenvalues(m)[:3]).max() <= 1e-8
    # transposing keeps the nonzero spectrum
    assert np.abs(fact.singular_values**2 - gram_eigenvalues(m.T)[:3]).max() <= 1e-8


def test_svd_invariants_on_random_shapes():
    rng = np.random.default_rng(6)
    for _ in range(100):
        rows = int(rng.integers(1, 21))
        cols = int(rng.integers(1, 21))
        m = rng.normal(size=(rows, cols))
        fact = svd(m)
        u, v = fact.left_factor, fact.right_factor
        assert np.abs(u.T @ u - np.eye(rows)).max() <= 1e-10
        assert np.abs(v.T @ v - np.eye(cols)).max() <= 1e-10
        s = fact.singular_values
        assert np.all(s >= 0) and np.all(np.diff(s) <= 0)
        err = np.abs(fact.reconstruct() - m).max()
        assert err <= 1e-9 * max(1.0, np.abs(m).max())


def test_rademacher_entries_exact():
    m = draw_ensemble(EnsembleSpec("rademacher", 4, 4, 1))
    assert set(np.unique(m)) <= {0.5, -0.5}


def test_draw_ensemble_deterministic():
    spec = EnsembleSpec("gaussian", 6, 9, 123)
    a = draw_ensemble(spec)
    b = draw_ensemble(spec)
    assert a.tobytes() == b.tobytes()


def test_gaussian_column_norm_moment():
    # E||col||^2 = rows * (1/rows) = 1
    total = 0.0
    for seed in range(10_000):
        col = draw_ensemble(EnsembleSpec("gaussian", 64, 1, seed))
        total += float(col[:, 0] @ col[:, 0])
    assert abs(total / 10_000 - 1.0) <= 0.05


def test_ensemble_spec_validation():
    with pytest.raises(ValueError, match="kind"):
        EnsembleSpec("uniform", 4, 4, 0)
    with pytest.raises(ValueError):
        EnsembleSpec("gaussian", 0, 4, 0)
    with pytest.raises(ValueError):
        EnsembleSpec("gaussian", 4, 4, -1)


def test_derive_seed_stable():
    a = linalg.derive_seed(7, 3, 1)
    b = linalg.derive_seed(7, 3, 1)
    c = linalg.derive_seed(7, 4, 1)
    assert a == b
    assert a != c


def test_matrix_file_roundtrip(tmp_path):
    rng = np.random.default_rng(8)
    m = rng.normal(size=(5, 3)) * 1e3
    path = tmp_path / "m.txt"
    linalg.write_matrix(m, path)
    back = linalg.read_matrix(path)
    assert back.tobytes() == m.tobytes()


def test_matrix_file_comments_skipped(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text("# a comment\n2 2\n1 0\n# another\n0 1\n")
    assert np.array_equal(linalg.read_matrix(path), np.eye(2))


def test_matrix_file_malformed(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("2 2\n1 0\n")
    with pytest.raises(ValueError, match="data rows"):
        linalg.read_matrix(path)
    path.write_text("2\n1 0\n0 1\n")
    with pytest.raises(ValueError, match="header"):
        linalg.read_matrix(path)
    path.write_text("2 2\n1 x\n0 1\n")
    with pytest.raises(ValueError, match="non-numeric"):
        linalg.read_matrix(path)
