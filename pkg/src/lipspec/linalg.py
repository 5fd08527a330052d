"""Symmetric sparse assembly and the generalized symmetric eigensolver."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

DENSE_LIMIT = 3000
DEFAULT_SHIFT = -1.0


class SolverError(RuntimeError):
    """Factorization or eigen-iteration failure."""


class SparseSym:
    """Symmetric matrix stored as its lower triangle.

    Triplets are accumulated with :meth:`add` (either triangle; upper entries
    are mirrored) and summed in sorted order by :meth:`compress`, so the
    result does not depend on the order in which element loops were merged.
    """

    def __init__(self, n):
        self.n = int(n)
        self._rows, self._cols, self._vals = [], [], []
        self._lower = None

    @classmethod
    def from_matrix(cls, A):
        A = sp.coo_matrix(A)
        out = cls(A.shape[0])
        low = A.row >= A.col
        out.add(A.row[low], A.col[low], A.data[low])
        return out

    def add(self, rows, cols, vals):
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        vals = np.asarray(vals, dtype=float).ravel()
        r, c = np.maximum(rows, cols), np.minimum(rows, cols)
        self._rows.append(r)
        self._cols.append(c)
        self._vals.append(vals)
        self._lower = None
        return self

    def add_local(self, dofs, blocks):
        """Scatter dense local matrices ``blocks[e]`` (k x k) at ``dofs[e]`` (lower part only)."""
        dofs = np.asarray(dofs)
        k = dofs.shape[1]
        I, J = np.tril_indices(k)
        rows = dofs[:, I]
        cols = dofs[:, J]
        return self.add(rows, cols, blocks[:, I, J])

    def compress(self):
        if self._lower is None:
            if self._rows:
                r = np.concatenate(self._rows)
                c = np.concatenate(self._cols)
                v = np.concatenate(self._vals)
            else:
                r = c = np.zeros(0, dtype=np.int64)
                v = np.zeros(0)
            order = np.lexsort((c, r))
            r, c, v = r[order], c[order], v[order]
            key = r * self.n + c
            start = np.flatnonzero(np.r_[True, key[1:] != key[:-1]])
            sums = np.add.reduceat(v, start) if len(v) else v
            self._rows, self._cols, self._vals = [r[start]], [c[start]], [sums]
            self._lower = sp.csr_matrix((sums, (r[start], c[start])), shape=(self.n, self.n))
        return self._lower

    def tocsr(self):
        L = self.compress()
        D = sp.diags(L.diagonal())
        return (L + L.T - D).tocsr()

    def toarray(self):
        return self.tocsr().toarray()

    def __matmul__(self, x):
        return self.tocsr() @ x

    @property
    def shape(self):
        return (self.n, self.n)

    def export(self) -> str:
        """Matrix-market style text: ``%%sym`` header and 1-based lower triplets."""
        L = self.compress().tocoo()
        order = np.lexsort((L.col, L.row))
        lines = ["%%sym", f"{self.n} {self.n} {L.nnz}"]
        for i in order:
            lines.append(f"{L.row[i] + 1} {L.col[i] + 1} {L.data[i]:.17g}")
        return "\n".join(lines) + "\n"


def as_csr(A):
    if isinstance(A, SparseSym):
        return A.tocsr()
    return sp.csr_matrix(A)


@dataclass
class EigResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    method: str
    iterations: int = 0
    tol: float = 1e-10
    meta: dict = field(default_factory=dict)

    def orthonormality_error(self, B):
        V = self.eigenvectors
        G = V.T @ (as_csr(B) @ V)
        return float(np.abs(G - np.eye(G.shape[0])).max())


def fix_signs(V):
    """Make the largest-magnitude entry of each column positive."""
    idx = np.argmax(np.abs(V), axis=0)
    s = np.sign(V[idx, np.arange(V.shape[1])])
    s[s == 0] = 1.0
    return V * s


def _residuals(A, B, w, V):
    R = A @ V - (B @ V) * w
    return np.linalg.norm(R, axis=0)


def _dense(A, B, k):
    Ad = A.toarray()
    Bd = B.toarray()
    try:
        L = sla.cholesky(Bd, lower=True)
    except np.linalg.LinAlgError as err:
        raise SolverError(f"B is not positive definite: {err}") from None
    # C = L^-1 A L^-T, symmetric standard problem
    X = sla.solve_triangular(L, Ad, lower=True)
    C = sla.solve_triangular(L, X.T, lower=True)
    C = 0.5 * (C + C.T)
    w, Y = sla.eigh(C, subset_by_index=[0, k - 1], driver="evr")
    V = sla.solve_triangular(L, Y, lower=True, trans="T")
    return w, V


def _shift_invert(A, B, k, sigma, tol, maxiter, seed):
    n = A.shape[0]
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(n)
    try:
        lu = spla.splu((A - sigma * B).tocsc())
    except RuntimeError as err:
        raise SolverError(f"shifted matrix is singular: {err}") from None
    op = spla.LinearOperator((n, n), matvec=lu.solve, dtype=float)
    try:
        w, V = spla.eigsh(A, k=k, M=B, sigma=sigma, which="LM", OPinv=op, v0=v0,
                          tol=tol, maxiter=maxiter)
    except spla.ArpackNoConvergence as err:
        raise SolverError(f"Lanczos did not converge: {len(err.eigenvalues)} of {k} pairs") from None
    return w, V


def gen_sym_eig(A, B, k: int, tol: float = 1e-8, method: str = "auto",
                sigma: float = DEFAULT_SHIFT, maxiter: int | None = None, seed: int = 0) -> EigResult:
    """Smallest ``k`` eigenpairs of ``A v = eta B v``.

    ``method`` is ``"dense"`` (Cholesky of ``B`` and a standard symmetric
    eigenproblem), ``"lanczos"`` (shift-invert Lanczos about ``sigma``) or
    ``"auto"``, which picks dense up to ``DENSE_LIMIT`` unknowns.
    Eigenvectors are ``B``-orthonormal; residuals ``||Av - eta Bv||_2`` are
    checked against ``tol * (|eta| + 1)``.
    """
    A = as_csr(A)
    B = as_csr(B)
    n = A.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    if method == "auto":
        method = "dense" if n <= DENSE_LIMIT or k >= n - 1 else "lanczos"
    if method == "lanczos" and k >= n - 1:
        method = "dense"
    if method == "dense":
        w, V = _dense(A, B, k)
        iters = 0
    elif method == "lanczos":
        w, V = _shift_invert(A, B, k, sigma, 0.0, maxiter, seed)
        iters = -1
    else:
        raise ValueError(f"unknown method {method!r}")
    order = np.argsort(w, kind="stable")
    w, V = w[order], V[:, order]
    # re-orthonormalize in the B inner product (clusters from Lanczos)
    G = V.T @ (B @ V)
    Lg = np.linalg.cholesky(0.5 * (G + G.T))
    V = np.linalg.solve(Lg, V.T).T
    # Rayleigh-Ritz on the final basis for consistent values
    H = V.T @ (A @ V)
    w2, Z = np.linalg.eigh(0.5 * (H + H.T))
    V = fix_signs(V @ Z)
    res = _residuals(A, B, w2, V)
    result = EigResult(w2, V, res, method, iters, tol, {"n": n, "k": k, "sigma": sigma})
    result.meta["orthonormality_error"] = result.orthonormality_error(B)
    bound = tol * (np.abs(w2) + 1.0)
    if np.any(res > bound):
        raise SolverError(f"residuals above tolerance: max ratio {np.max(res / bound):.3g}")
    return result


def solve_spd(B, rhs):
    """Solve ``B x = rhs`` for symmetric positive definite ``B``."""
    B = as_csr(B)
    rhs = np.asarray(rhs, dtype=float)
    if B.shape[0] <= DENSE_LIMIT:
        try:
            c = sla.cho_factor(B.toarray(), lower=True)
        except np.linalg.LinAlgError as err:
            raise SolverError(f"matrix is not positive definite: {err}") from None
        return sla.cho_solve(c, rhs)
    x = spla.spsolve(B.tocsc(), rhs)
    if not np.all(np.isfinite(x)):
        raise SolverError("factorization failed")
    return x
