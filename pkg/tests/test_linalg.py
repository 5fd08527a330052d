import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from lipspec.linalg import SolverError, SparseSym, fix_signs, gen_sym_eig, solve_spd


def tridiag(n):
    return sp.diags([-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1]).tocsr()


def random_pencil(n, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, n))
    A = X + X.T
    Y = rng.standard_normal((n, n))
    B = Y @ Y.T + n * np.eye(n)
    return sp.csr_matrix(A), sp.csr_matrix(B)


@pytest.mark.parametrize("method", ["dense", "lanczos"])
def test_diagonal_examples(method):
    r = gen_sym_eig(sp.diags([1.0, 2.0, 3.0]), sp.identity(3), 3, method=method)
    assert np.allclose(r.eigenvalues, [1, 2, 3], atol=1e-12)
    r = gen_sym_eig(sp.diags([2.0, 2.0]), sp.diags([2.0, 1.0]), 2, method=method)
    assert np.allclose(r.eigenvalues, [1, 2], atol=1e-12)


@pytest.mark.parametrize("method", ["dense", "lanczos"])
def test_toeplitz_smallest(method):
    r = gen_sym_eig(tridiag(50), sp.identity(50), 1, method=method)
    assert abs(r.eigenvalues[0] - 4 * math.sin(math.pi / 102) ** 2) <= 1e-10


def test_toeplitz_first_five_lanczos_vs_closed_form():
    n = 4000  # above the dense limit, so auto uses Lanczos
    r = gen_sym_eig(tridiag(n), sp.identity(n), 5)
    assert r.method == "lanczos"
    exact = [4 * math.sin(j * math.pi / (2 * (n + 1))) ** 2 for j in range(1, 6)]
    assert np.allclose(r.eigenvalues, exact, rtol=1e-9, atol=1e-14)


def test_result_invariants():
    A, B = random_pencil(40, 1)
    r = gen_sym_eig(A, B, 10)
    assert np.all(np.diff(r.eigenvalues) >= 0)
    assert r.orthonormality_error(B) <= 1e-8
    assert np.all(r.residuals <= 1e-8 * (np.abs(r.eigenvalues) + 1))
    assert r.meta["orthonormality_error"] == r.orthonormality_error(B)
    # sign convention: largest-magnitude entry of each vector is positive
    idx = np.argmax(np.abs(r.eigenvectors), axis=0)
    assert np.all(r.eigenvectors[idx, np.arange(10)] > 0)


def test_dense_and_lanczos_agree():
    A, B = random_pencil(60, 2)
    # shift the spectrum up so sigma = -1 lies below it
    lo = gen_sym_eig(A, B, 1, method="dense").eigenvalues[0]
    A2 = A + (abs(lo) + 1) * B
    d = gen_sym_eig(A2, B, 6, method="dense")
    s = gen_sym_eig(A2, B, 6, method="lanczos")
    assert np.allclose(d.eigenvalues, s.eigenvalues, rtol=1e-10)
    assert np.allclose(np.abs(d.eigenvectors.T @ (B @ s.eigenvectors)), np.eye(6), atol=1e-6)


def test_min_principle_random_vectors():
    A, B = random_pencil(30, 3)
    r = gen_sym_eig(A, B, 3)
    V = r.eigenvectors
    rq = np.einsum("ij,ij->j", V, A @ V) / np.einsum("ij,ij->j", V, B @ V)
    eta1 = rq.min()
    assert eta1 == pytest.approx(r.eigenvalues[0], abs=1e-10)
    W = np.random.default_rng(4).standard_normal((30, 1000))
    q = np.einsum("ij,ij->j", W, A @ W) / np.einsum("ij,ij->j", W, B @ W)
    assert q.min() >= eta1 - 1e-8


def test_courant_fischer_spot_check():
    A, B = random_pencil(25, 5)
    r = gen_sym_eig(A, B, 4)
    rng = np.random.default_rng(6)
    Ad, Bd = A.toarray(), B.toarray()
    for j in range(1, 5):
        for _ in range(100):
            Y = rng.standard_normal((25, j))
            vals = np.linalg.eigvals(np.linalg.solve(Y.T @ Bd @ Y, Y.T @ Ad @ Y)).real
            assert vals.max() >= r.eigenvalues[j - 1] - 1e-8


def test_deterministic():
    A, B = random_pencil(80, 7)
    for method in ("dense", "lanczos"):
        A2 = A + 20 * B
        r1 = gen_sym_eig(A2, B, 5, method=method, seed=3)
        r2 = gen_sym_eig(A2, B, 5, method=method, seed=3)
        assert np.array_equal(r1.eigenvalues, r2.eigenvalues)
        assert np.array_equal(r1.eigenvectors, r2.eigenvectors)


def test_not_spd_raises():
    with pytest.raises(SolverError):
        gen_sym_eig(sp.identity(3), sp.diags([1.0, -1.0, 1.0]), 2, method="dense")


def test_bad_k():
    with pytest.raises(ValueError):
        gen_sym_eig(sp.identity(3), sp.identity(3), 4)


def test_solve_spd_examples():
    assert np.allclose(solve_spd(sp.identity(3), [1.0, 2.0, 3.0]), [1, 2, 3])
    assert np.allclose(solve_spd(sp.diags([4.0]), [8.0]), [2.0])
    B = tridiag(100)
    x = solve_spd(B, B @ np.ones(100))
    assert np.max(np.abs(x - 1)) <= 1e-10
    assert np.linalg.norm(B @ x - B @ np.ones(100)) <= 1e-10 * np.linalg.norm(B @ np.ones(100))


def test_fix_signs():
    V = np.array([[1.0, -3.0], [-2.0, 1.0]])
    assert np.array_equal(fix_signs(V), np.array([[-1.0, 3.0], [2.0, -1.0]]))


def test_sparse_sym_assembly():
    S = SparseSym(3)
    S.add([1, 0], [0, 1], [2.0, 3.0])  # upper entry folded into the lower triangle
    S.add([2], [2], [1.5])
    S.add_local(np.array([[0, 2]]), np.array([[[1.0, 4.0], [4.0, 2.0]]]))
    A = S.toarray()
    assert np.array_equal(A, A.T)
    assert np.array_equal(A, [[1.0, 5.0, 4.0], [5.0, 0.0, 0.0], [4.0, 0.0, 3.5]])
    text = S.export()
    assert text.splitlines()[0] == "%%sym"
    assert text.splitlines()[1] == "3 3 4"
    assert "2 1 5" in text.splitlines()


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 9), st.integers(0, 9), st.floats(-10, 10)), min_size=1, max_size=60),
       st.randoms(use_true_random=False))
def test_compression_order_independent(triplets, rnd):
    a, b = SparseSym(10), SparseSym(10)
    for r, c, v in triplets:
        a.add([r], [c], [v])
    shuffled = list(triplets)
    rnd.shuffle(shuffled)
    for r, c, v in shuffled:
        b.add([r], [c], [v])
    A, Bm = a.toarray(), b.toarray()
    assert np.array_equal(A, A.T)
    assert np.allclose(A, Bm, atol=1e-12)
    assert a.export().splitlines()[1] == b.export().splitlines()[1]
