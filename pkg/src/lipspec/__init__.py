"""Laplacian eigenvalues on planar domains through a vector-field variational principle.

The first nonzero Neumann eigenvalue of a simply connected planar domain
with convex corners minimizes a curvature-corrected Dirichlet energy over
tangential vector fields, with gradients of eigenfunctions as minimizers.
This package discretizes that principle with P1 finite elements and checks
its consequences numerically, including the hot spots property on lip
domains.

Modules
-------
geometry    boundaries made of lines and circular arcs, lip test
meshing     constrained Delaunay meshes linked to the exact boundary
linalg      symmetric assembly and generalized eigensolvers
fem_scalar  Neumann / Dirichlet Laplacian eigenpairs
fem_vector  constrained vector form and its eigenpairs
analysis    spectrum matching, classification, hot spots checks
export      JSON / CSV / VTK output
cli         command line front end
"""

__version__ = "0.1.0"
