"""P1 finite elements for the Neumann and Dirichlet Laplacians."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import EigResult, SparseSym, gen_sym_eig
from .meshing import Mesh

NEUMANN = "neumann"
DIRICHLET = "dirichlet"

_MASS_REF = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0


def local_stiffness(mesh: Mesh):
    """Element stiffness matrices, shape (T, 3, 3)."""
    G = mesh.gradients()
    return np.einsum("tid,tjd->tij", G, G) * mesh.areas[:, None, None]


def local_mass(mesh: Mesh):
    return mesh.areas[:, None, None] * _MASS_REF[None]


def stiffness_matrix(mesh: Mesh) -> SparseSym:
    return SparseSym(mesh.n_nodes).add_local(mesh.triangles, local_stiffness(mesh))


def mass_matrix(mesh: Mesh) -> SparseSym:
    return SparseSym(mesh.n_nodes).add_local(mesh.triangles, local_mass(mesh))


def _bc(bc):
    bc = bc.lower()
    if bc not in (NEUMANN, DIRICHLET):
        raise ValueError(f"boundary condition must be 'neumann' or 'dirichlet', got {bc!r}")
    return bc


def free_nodes(mesh: Mesh, bc: str):
    if _bc(bc) == NEUMANN:
        return np.arange(mesh.n_nodes)
    return mesh.interior_nodes


def assemble_scalar(mesh: Mesh, bc: str):
    """Stiffness and consistent mass on the free nodes.

    Returns ``(K, M, dofs)`` where ``dofs`` maps unknowns to mesh nodes.
    Neumann keeps every node; Dirichlet eliminates the boundary nodes.
    """
    dofs = free_nodes(mesh, bc)
    K = stiffness_matrix(mesh)
    M = mass_matrix(mesh)
    if len(dofs) == mesh.n_nodes:
        return K, M, dofs
    sel = np.ix_(dofs, dofs)
    return (SparseSym.from_matrix(K.tocsr()[sel]), SparseSym.from_matrix(M.tocsr()[sel]), dofs)


@dataclass
class ScalarEigenpairs:
    """Eigenvalues (ascending) and mass-orthonormal nodal eigenfunctions.

    ``functions[:, k]`` holds the k-th eigenfunction at all mesh nodes;
    Dirichlet eigenfunctions are zero on the boundary.
    """

    bc: str
    eigenvalues: np.ndarray
    functions: np.ndarray
    residuals: np.ndarray
    mesh: Mesh
    result: EigResult

    @property
    def h(self):
        return self.mesh.h

    def to_dict(self):
        return {
            "bc": self.bc,
            "h": self.mesh.h,
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "residuals": [float(x) for x in self.residuals],
        }


def solve_scalar(mesh: Mesh, bc: str, k: int, tol: float = 1e-8, method: str = "auto") -> ScalarEigenpairs:
    """The ``k`` smallest eigenpairs of the Neumann or Dirichlet Laplacian."""
    if k < 1:
        raise ValueError("k must be at least 1")
    bc = _bc(bc)
    K, M, dofs = assemble_scalar(mesh, bc)
    res = gen_sym_eig(K, M, k, tol=tol, method=method)
    funcs = np.zeros((mesh.n_nodes, k))
    funcs[dofs] = res.eigenvectors
    return ScalarEigenpairs(bc, res.eigenvalues, funcs, res.residuals, mesh, res)
