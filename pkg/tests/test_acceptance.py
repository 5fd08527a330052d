"""Acceptance criteria 1-10, each printed as one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the lines are repeated in
the "acceptance criteria" section of the terminal summary.
"""

import math
import subprocess
import sys

import numpy as np
import pytest

from lipspec import analysis as an
from lipspec import geometry as g
from lipspec import meshing
from lipspec.fem_scalar import NEUMANN, solve_scalar
from lipspec.fem_vector import rayleigh, solve_vector

import oracles
from conftest import DEMO_DOMAINS, FLEET, lip_triangle, record

PI2 = math.pi ** 2


def rel(a, b):
    return abs(a - b) / abs(b)


@pytest.fixture(scope="module")
def triangle_fine():
    """Lip triangle at h = 0.03 with its Neumann pairs."""
    spec = lip_triangle()
    mesh = meshing.triangulate(spec, 0.03)
    return spec, mesh, solve_scalar(mesh, NEUMANN, 6)


def test_criterion_01_scalar_oracles(fleet):
    neu, dr = fleet.neumann("diamond"), fleet.dirichlet("diamond")
    exact = [PI2 / 2, PI2 / 2, PI2]
    errs = [rel(neu.eigenvalues[i + 1], exact[i]) for i in range(3)]
    err_d = rel(dr.eigenvalues[0], PI2)
    dn, dd = fleet.neumann("disk"), fleet.dirichlet("disk")
    err_mu = rel(dn.eigenvalues[1], oracles.DISK_MU2)
    err_lam = rel(dd.eigenvalues[0], oracles.DISK_LAMBDA1)
    ok = (abs(neu.eigenvalues[0]) <= 1e-8 and max(errs) <= 0.01 and err_d <= 0.01
          and err_mu <= 0.02 and err_lam <= 0.02)
    record(1, ok, f"diamond mu1={neu.eigenvalues[0]:.1e}, max rel err mu2..4={max(errs):.2e}, "
                  f"lambda1 err={err_d:.2e}; disk mu2 err={err_mu:.2e} (ref {oracles.DISK_MU2:.5f}), "
                  f"lambda1 err={err_lam:.2e} (ref {oracles.DISK_LAMBDA1:.5f})")
    assert ok


def test_criterion_02_spectrum_coincidence(fleet):
    parts, ok = [], True
    for name, K in (("diamond", 4), ("disk", 6), ("triangle", 4)):
        rep = an.match_spectra(fleet.classified(name), fleet.neumann(name), fleet.dirichlet(name), K, rel_tol=0.02)
        gap = max(m["rel_gap"] for m in rep.matches) if rep.matches else float("nan")
        ok &= rep.passed and rep.consistent
        parts.append(f"{name} K={K} max gap={gap:.2e} consistent={rep.consistent}")
    record(2, ok, "; ".join(parts))
    assert ok


def test_criterion_03_minimizer_identity(fleet, triangle_fine):
    parts, ok = [], True
    for name in ("diamond", "triangle"):
        mesh, neu = fleet.mesh(name), fleet.neumann(name)
        u = an.recover_gradient(mesh, neu.functions[:, 1])
        ratio = rayleigh(u, mesh) / neu.eigenvalues[1]
        ok &= 0.98 <= ratio <= 1.02
        parts.append(f"{name} rayleigh/mu2={ratio:.4f}")
    record(3, ok, "; ".join(parts))
    assert ok


def test_criterion_04_neumann_below_dirichlet(fleet):
    parts, ok = [], True
    for name in FLEET:
        v = an.order_check(fleet.neumann(name), fleet.dirichlet(name))
        ok &= v.passed and v.gap > 0
        parts.append(f"{name} gap={v.gap:.4f}")
    record(4, ok, "; ".join(parts))
    assert ok


def test_criterion_05_hot_spots_lip_triangle(triangle_fine):
    spec, mesh, neu = triangle_fine
    rep = an.hotspots_check(spec, 0.03, strict=True, mesh=mesh, neumann=neu)
    h = mesh.h
    ok = (rep.cluster_size == 1 and rep.min_deriv_plus > 0 and rep.min_deriv_minus > 0
          and rep.dist_min_v0 <= h and rep.dist_max_v1 <= h and rep.passed)
    record(5, ok, f"cluster={rep.cluster_size}, min d/d(1,1)={rep.min_deriv_plus:.4f}, "
                  f"min d/d(1,-1)={rep.min_deriv_minus:.4f} over {rep.tested_points} barycenters, "
                  f"argmin dist={rep.dist_min_v0:.2e}, argmax dist={rep.dist_max_v1:.2e} (h={h})")
    assert ok


def test_criterion_06_square_exception(fleet):
    dia = an.hotspots_check(fleet.spec("diamond"), 0.04, mesh=fleet.mesh("diamond"),
                            neumann=fleet.neumann("diamond"))
    rect = an.hotspots_check(fleet.spec("rectangle"), 0.04, mesh=fleet.mesh("rectangle"),
                             neumann=fleet.neumann("rectangle"))
    ok = dia.cluster_size == 2 and dia.square and rect.cluster_size == 1 and rect.rectangle
    record(6, ok, f"diamond mu2 cluster={dia.cluster_size} square={dia.square}; "
                  f"rotated rectangle cluster={rect.cluster_size} rectangle={rect.rectangle}")
    assert ok


def test_criterion_07_absolute_value_minimizer(triangle_fine):
    spec, mesh, neu = triangle_fine
    v = an.abs_minimizer_check(spec, 0.03, delta=0.05, mesh=mesh, neumann=neu)
    ok = v.min_boundary_product >= -1e-8 and v.rel_dev <= 0.05
    record(7, ok, f"min boundary u1*u2={v.min_boundary_product:.2e}, "
                  f"rayleigh(|u|)={v.rayleigh_abs:.5f} vs mu2={v.mu2:.5f} (rel dev {v.rel_dev:.2e})")
    assert ok


def test_criterion_08_convergence_order():
    coarse = meshing.triangulate(g.diamond(), 0.08)
    fine = meshing.refine(coarse)
    mu = [solve_scalar(m, NEUMANN, 2).eigenvalues[1] for m in (coarse, fine)]
    eta = [solve_vector(m, 1).eigenvalues[0] for m in (coarse, fine)]
    r_mu = (mu[0] - PI2 / 2) / (mu[1] - PI2 / 2)
    r_eta = (eta[0] - PI2 / 2) / (eta[1] - PI2 / 2)
    extra = an.extrapolate(mu[0], mu[1])
    err = rel(extra, PI2 / 2)
    ok = 3.2 <= r_mu <= 4.8 and 3.2 <= r_eta <= 4.8 and err <= 0.002
    record(8, ok, f"mu2 ratio={r_mu:.3f}, eta1 ratio={r_eta:.3f} (h=0.08 vs 0.04), "
                  f"extrapolated mu2 rel err={err:.2e}")
    assert ok


def test_criterion_09_courant_fischer_and_solver_quality(fleet):
    vec = fleet.vector("diamond")
    verdicts = [an.minmax_bound_check(vec, j, trials=200, seed=0) for j in (1, 2, 3)]
    worst_res, worst_orth, count = 0.0, 0.0, 0
    for name in FLEET:
        for pairs in (fleet.neumann(name), fleet.dirichlet(name), fleet.vector(name)):
            worst_res = max(worst_res, float(np.max(pairs.residuals)))
            worst_orth = max(worst_orth, pairs.result.meta["orthonormality_error"])
            count += 1
    ok = all(v.passed for v in verdicts) and worst_res <= 1e-8 and worst_orth <= 1e-8
    margins = ", ".join(f"j={v.j} min margin={v.min_margin:.3e}" for v in verdicts)
    record(9, ok, f"{margins}; {count} fleet solves, max residual={worst_res:.1e}, "
                  f"max |V'BV-I|={worst_orth:.1e}")
    assert ok


SUITE = [
    ["validate", "diamond.dom", "--search"],
    ["validate", "equilateral.dom", "--search"],
    ["mesh", "disk.dom", "--h", "0.1"],
    ["solve", "scalar", "disk.dom", "--bc", "neumann", "--k", "3", "--h", "0.1"],
    ["solve", "vector", "lip_triangle.dom", "--k", "3", "--h", "0.08"],
    ["verify", "spectrum", "diamond.dom", "--h", "0.08", "--k", "4", "--tol", "0.02", "--trials", "50"],
    ["verify", "hotspots", "lip_triangle.dom", "--h", "0.05", "--strict"],
    ["verify", "hotspots", "diamond.dom", "--h", "0.08"],
    ["study", "convergence", "diamond.dom", "--h", "0.2", "--levels", "2", "--k", "2"],
]


def _run_suite(out):
    codes = []
    for argv in SUITE:
        argv = [str(DEMO_DOMAINS / a) if a.endswith(".dom") else a for a in argv]
        proc = subprocess.run([sys.executable, "-m", "lipspec", *argv, "--out", str(out)],
                              capture_output=True, text=True, check=False)
        codes.append(proc.returncode)
    return codes, {p.name: p.read_bytes() for p in sorted(out.iterdir())}


def test_criterion_10_determinism(tmp_path):
    codes_a, files_a = _run_suite(tmp_path / "run1")
    codes_b, files_b = _run_suite(tmp_path / "run2")
    ok = codes_a == codes_b and all(c == 0 for c in codes_a) and files_a == files_b and len(files_a) > 0
    record(10, ok, f"{len(SUITE)} commands run twice in fresh processes, {len(files_a)} artifacts, "
                   f"byte-identical={files_a == files_b}, exit codes={codes_a}")
    assert ok
