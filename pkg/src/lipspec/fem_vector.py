"""Vector-field eigenproblem with tangential boundary condition.

The quadratic form on fields ``u = (u1, u2)`` is

    a[u] = int |grad u1|^2 + |grad u2|^2  -  int_boundary kappa |u|^2,

restricted to fields with ``<u, nu> = 0`` on the boundary.  Its eigenvalues
are the positive Neumann and Dirichlet eigenvalues together, so the lowest
one is the first nonzero Neumann eigenvalue, attained at gradients of the
corresponding eigenfunctions.

Discretization: componentwise P1 on the mesh; the curvature term is
integrated on every boundary edge with 3-point Gauss quadrature using the
exact curvature of the source segment; the normal component is eliminated at
every smooth boundary node (exact normal), and both components are removed
at corners.  Full nodal vectors are laid out as ``[u1 (N values), u2 (N values)]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .fem_scalar import mass_matrix, stiffness_matrix
from .linalg import EigResult, SparseSym, gen_sym_eig
from .meshing import Mesh

GAUSS3_T = 0.5 + 0.5 * np.array([-np.sqrt(0.6), 0.0, np.sqrt(0.6)])
GAUSS3_W = np.array([5.0, 8.0, 5.0]) / 18.0

INTERIOR, TANGENTIAL, CLAMPED = 0, 1, 2


class ConstraintError(ValueError):
    pass


def boundary_quadrature(mesh: Mesh):
    """Gauss points on boundary edges.

    Returns ``(t, w, kappa, normals)``: reference coordinates (3,), weights
    scaled by the arclength of each edge (B, 3), exact signed curvature
    (B, 3) and exact outer normals (B, 3, 2).
    """
    if mesh.spec is None:
        raise ConstraintError("mesh has no link to its domain geometry")
    B = len(mesh.bnd_edges)
    kappa = np.empty((B, 3))
    normals = np.empty((B, 3, 2))
    s0, s1 = mesh.bnd_param[:, 0], mesh.bnd_param[:, 1]
    s = s0[:, None] + GAUSS3_T[None, :] * (s1 - s0)[:, None]
    for seg_id in np.unique(mesh.bnd_segment):
        sel = mesh.bnd_segment == seg_id
        seg = mesh.spec.segments[seg_id]
        kappa[sel] = seg.curvature(s[sel])
        normals[sel] = seg.normal(s[sel])
    w = GAUSS3_W[None, :] * (s1 - s0)[:, None]
    return GAUSS3_T, w, kappa, normals


def curvature_matrix(mesh: Mesh) -> SparseSym:
    """Scalar boundary matrix ``int_boundary kappa phi_i phi_j``."""
    t, w, kappa, _ = boundary_quadrature(mesh)
    phi = np.stack([1.0 - t, t])  # (2, 3)
    local = np.einsum("eq,iq,jq->eij", w * kappa, phi, phi)
    return SparseSym(mesh.n_nodes).add_local(mesh.bnd_edges, local)


def _block(S: SparseSym, n):
    L = S.compress()
    out = SparseSym(2 * n)
    coo = L.tocoo()
    out.add(coo.row, coo.col, coo.data)
    out.add(coo.row + n, coo.col + n, coo.data)
    return out


def assemble_vector_form(mesh: Mesh):
    """Form matrix and mass matrix on the full nodal vector space (size 2N).

    The form matrix is the componentwise stiffness minus the curvature
    boundary matrix; on polygons it equals the block stiffness exactly.
    """
    n = mesh.n_nodes
    K = stiffness_matrix(mesh).tocsr()
    C = curvature_matrix(mesh).tocsr()
    form = SparseSym.from_matrix(sp.block_diag([K - C, K - C]))
    mass = _block(mass_matrix(mesh), n)
    return form, mass


@dataclass
class ConstraintMap:
    """Reduction from free unknowns to full nodal vectors.

    ``P`` has orthonormal columns: one column per free unknown, either a unit
    coordinate direction (interior nodes) or the exact unit tangent at a
    smooth boundary node.  Corner nodes have no free unknowns.
    """

    P: sp.csr_matrix
    kind: np.ndarray
    normals: np.ndarray
    tangents: np.ndarray

    @property
    def n_free(self):
        return self.P.shape[1]

    def expand(self, x):
        """Free unknowns -> full nodal vector(s) of length 2N."""
        return self.P @ x

    def project(self, u):
        """Orthogonal projection of full nodal fields onto the constrained space."""
        return self.P @ (self.P.T @ u)


def _node_frames(mesh: Mesh):
    spec = mesh.spec
    n = mesh.n_nodes
    kind = np.zeros(n, dtype=np.int8)
    normals = np.full((n, 2), np.nan)
    tangents = np.full((n, 2), np.nan)
    B = len(mesh.bnd_edges)
    for e in range(B):
        a = mesh.bnd_edges[e, 0]
        seg = spec.segments[mesh.bnd_segment[e]]
        prev = (e - 1) % B
        if mesh.bnd_corner[e, 0] or mesh.bnd_corner[prev, 1]:
            kind[a] = CLAMPED
            continue
        s = mesh.bnd_param[e, 0]
        nu = seg.normal(s)
        # a smooth junction must agree with the incoming segment's normal
        pseg = spec.segments[mesh.bnd_segment[prev]]
        nu_prev = pseg.normal(mesh.bnd_param[prev, 1])
        if np.linalg.norm(nu - nu_prev) > 1e-8:
            raise ConstraintError(f"inconsistent normals at non-corner boundary node {a}")
        kind[a] = TANGENTIAL
        normals[a] = nu
        tangents[a] = seg.tangent(s)
    return kind, normals, tangents


def build_tangential_constraint(mesh: Mesh) -> ConstraintMap:
    """Eliminate the normal component at boundary nodes, both at corners."""
    n = mesh.n_nodes
    kind, normals, tangents = _node_frames(mesh)
    rows, cols, vals = [], [], []
    col = 0
    for i in range(n):
        if kind[i] == INTERIOR:
            rows += [i, n + i]
            cols += [col, col + 1]
            vals += [1.0, 1.0]
            col += 2
        elif kind[i] == TANGENTIAL:
            rows += [i, n + i]
            cols += [col, col]
            vals += [tangents[i, 0], tangents[i, 1]]
            col += 1
    P = sp.csr_matrix((vals, (rows, cols)), shape=(2 * n, col))
    P.eliminate_zeros()
    return ConstraintMap(P, kind, normals, tangents)


def to_nodal(u, n=None):
    """Flat ``[u1; u2]`` vector -> (N, 2) array (no copy for (N, 2) input)."""
    u = np.asarray(u, dtype=float)
    if u.ndim == 2 and u.shape[1] == 2:
        return u
    n = n if n is not None else u.shape[0] // 2
    return np.stack([u[:n], u[n:2 * n]], axis=1)


def to_flat(u):
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        return u
    return np.concatenate([u[:, 0], u[:, 1]])


@dataclass
class VectorSystem:
    """Assembled and reduced vector eigenproblem on one mesh."""

    mesh: Mesh
    form: sp.csr_matrix
    mass: sp.csr_matrix
    constraint: ConstraintMap
    A: sp.csr_matrix
    B: sp.csr_matrix


def vector_system(mesh: Mesh) -> VectorSystem:
    F, Mb = assemble_vector_form(mesh)
    F, Mb = F.tocsr(), Mb.tocsr()
    cm = build_tangential_constraint(mesh)
    P = cm.P
    A = (P.T @ F @ P).tocsr()
    B = (P.T @ Mb @ P).tocsr()
    A = 0.5 * (A + A.T)
    B = 0.5 * (B + B.T)
    return VectorSystem(mesh, F, Mb, cm, A.tocsr(), B.tocsr())


@dataclass
class VectorEigenpairs:
    """Eigenvalues and mass-orthonormal eigenfields of the constrained form.

    ``fields[j]`` is the j-th eigenfield as an (N, 2) nodal array;
    ``reduced[:, j]`` its free-unknown coordinates.  ``tags`` is filled by
    :func:`lipspec.analysis.classify_all`.
    """

    eigenvalues: np.ndarray
    fields: np.ndarray
    reduced: np.ndarray
    form_values: np.ndarray
    residuals: np.ndarray
    system: VectorSystem
    result: EigResult
    tags: list = field(default_factory=list)

    @property
    def mesh(self):
        return self.system.mesh

    def to_dict(self):
        out = {
            "h": self.mesh.h,
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "residuals": [float(x) for x in self.residuals],
            "form_values": [float(x) for x in self.form_values],
        }
        if self.tags:
            out["classifications"] = [t.to_dict() for t in self.tags]
        return out


def solve_vector(mesh: Mesh, k: int, tol: float = 1e-8, method: str = "auto",
                 system: VectorSystem | None = None) -> VectorEigenpairs:
    """The ``k`` smallest eigenpairs of the constrained vector form."""
    if k < 1:
        raise ValueError("k must be at least 1")
    system = system if system is not None else vector_system(mesh)
    res = gen_sym_eig(system.A, system.B, k, tol=tol, method=method)
    full = system.constraint.expand(res.eigenvectors)
    n = mesh.n_nodes
    fields = np.stack([to_nodal(full[:, j], n) for j in range(k)])
    form_vals = np.einsum("ij,ij->j", full, system.form @ full)
    return VectorEigenpairs(res.eigenvalues, fields, res.eigenvectors, form_vals,
                            res.residuals, system, res)


def rayleigh(u, mesh: Mesh, system: VectorSystem | None = None) -> float:
    """``a[u] / ||u||^2`` for a nodal field (constraints are not enforced)."""
    flat = to_flat(u)
    if not np.any(flat):
        raise ValueError("Rayleigh quotient of the zero field")
    if system is not None:
        F, Mb = system.form, system.mass
    else:
        F, Mb = assemble_vector_form(mesh)
        F, Mb = F.tocsr(), Mb.tocsr()
    return float(flat @ (F @ flat) / (flat @ (Mb @ flat)))
