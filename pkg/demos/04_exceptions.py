"""The square and rectangle exceptions, and a domain that is not lip.

The diamond (a square) has a double mu_2, so no monotone eigenfunction is
singled out.  The 2 x 1 rectangle turned by pi/4 has a simple mu_2, but its
eigenfunction is constant across the short direction, so one directional
derivative is zero rather than positive.  Here P1 noise makes the discrete
minimum slightly negative.  The equilateral triangle fails the lip test.

    python demos/04_exceptions.py [h]
"""

import math
import sys

from lipspec import analysis, geometry

h = float(sys.argv[1]) if len(sys.argv) > 1 else 0.04

rep = analysis.hotspots_check(geometry.diamond(), h)
print(f"diamond: mu2 cluster size {rep.cluster_size}, square flag {rep.square}, skipped {rep.skipped}")

rect = geometry.rectangle(2.0, 1.0, angle=math.pi / 4)
rep = analysis.hotspots_check(rect, h)
print(f"rotated rectangle: cluster {rep.cluster_size}, rectangle flag {rep.rectangle}, "
      f"mu3 - mu2 = {rep.mu[2] - rep.mu[1]:.4f} (3 pi^2/4 = {3 * math.pi ** 2 / 4:.4f})")
print(f"  min derivatives: along (1,1) {rep.min_deriv_plus:.4f}, along (1,-1) {rep.min_deriv_minus:.4f}")
print(f"  claims: {rep.claims}")

tri = geometry.polygon([(0, 0), (1, 0), (0.5, math.sqrt(3) / 2)])
cert = geometry.check_lip(tri, search=True)
print(f"equilateral: {cert.verdict}, rotation search: {cert.search_verdict}")
try:
    analysis.hotspots_check(tri, h)
except analysis.NotLipError as err:
    print("  hotspots_check:", err)
