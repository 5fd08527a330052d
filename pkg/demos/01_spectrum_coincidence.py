"""Vector eigenvalues versus the merged Neumann/Dirichlet spectrum.

The constrained vector form has no eigenvalues of its own: every one of them
is either a positive Neumann eigenvalue (with a gradient eigenfield) or a
Dirichlet eigenvalue (with a rotated-gradient eigenfield).  On the disk the
two families interleave, so this is a good place to watch the attribution.

    python demos/01_spectrum_coincidence.py [h]
"""

import sys

from lipspec import analysis, geometry, meshing
from lipspec.fem_scalar import DIRICHLET, NEUMANN, solve_scalar
from lipspec.fem_vector import solve_vector

h = float(sys.argv[1]) if len(sys.argv) > 1 else 0.05
K = 6

for name, spec in (("diamond", geometry.diamond()), ("disk", geometry.disk())):
    mesh = meshing.triangulate(spec, h)
    neu = solve_scalar(mesh, NEUMANN, K + 1)
    dirichlet = solve_scalar(mesh, DIRICHLET, K)
    vec = analysis.classify_all(solve_vector(mesh, K + 2))
    rep = analysis.match_spectra(vec, neu, dirichlet, K)

    print(f"\n{name}: {mesh.n_nodes} nodes, h = {mesh.h}")
    print(f"{'j':>3} {'eta_j':>10}  {'source':<12} {'value':>10} {'rel gap':>9}  {'tag':<17} {'curl':>6} {'div':>6}")
    for m in rep.matches:
        src = f"{m['source'][0]}{m['index']}"
        print(f"{m['vector_index']:>3} {m['eta']:>10.5f}  {src:<12} {m['value']:>10.5f} "
              f"{m['rel_gap']:>9.2e}  {m['tag']:<17} {m['curl_residual']:>6.3f} {m['div_residual']:>6.3f}")
    print(f"passed: {rep.passed}, tags agree with sources: {rep.consistent}")
