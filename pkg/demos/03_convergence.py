"""Second-order convergence and Richardson extrapolation on the diamond.

The diamond is the square of side sqrt 2, so mu_2 = eta_1 = pi^2 / 2 exactly.
Each refinement halves h and should divide the error by about four.

    python demos/03_convergence.py [h0] [levels]
"""

import math
import sys

from lipspec import analysis, geometry, meshing
from lipspec.fem_scalar import NEUMANN, solve_scalar
from lipspec.fem_vector import solve_vector

h0 = float(sys.argv[1]) if len(sys.argv) > 1 else 0.1
levels = int(sys.argv[2]) if len(sys.argv) > 2 else 2
exact = math.pi ** 2 / 2

mesh = meshing.triangulate(geometry.diamond(), h0)
hs, mu, eta = [], [], []
for lev in range(levels + 1):
    if lev:
        mesh = meshing.refine(mesh)
    hs.append(mesh.h)
    mu.append(solve_scalar(mesh, NEUMANN, 2).eigenvalues[1])
    eta.append(solve_vector(mesh, 1).eigenvalues[0])

for label, vals in (("mu_2", mu), ("eta_1", eta)):
    print(f"\n{label} (exact {exact:.8f})")
    for row in analysis.convergence_table(vals, hs, exact):
        ext = row.get("extrapolated")
        print(f"  h={row['h']:<7g} value={row['value']:.8f} error={row['error']:.3e} "
              f"ratio={row.get('ratio', float('nan')):6.3f} "
              + (f"extrapolated={ext:.8f} ({abs(ext - exact) / exact:.1e})" if ext else ""))
