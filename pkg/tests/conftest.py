"""Shared fixtures: the test fleet and its (expensive) solves, computed once."""

import math
from pathlib import Path

import pytest

from lipspec import analysis, geometry, meshing
from lipspec.fem_scalar import DIRICHLET, NEUMANN, solve_scalar
from lipspec.fem_vector import solve_vector

DEMO_DOMAINS = Path(__file__).resolve().parent.parent / "demos" / "domains"

FLEET_H = 0.04


def lip_triangle():
    return geometry.polygon([(0, 0), (2, 0), (1, 1)])


def rotated_rectangle():
    return geometry.rectangle(2.0, 1.0, angle=math.pi / 4)


def equilateral():
    return geometry.polygon([(0, 0), (1, 0), (0.5, math.sqrt(3) / 2)])


FLEET = {
    "diamond": geometry.diamond,
    "disk": geometry.disk,
    "triangle": lip_triangle,
    "rectangle": rotated_rectangle,
}

# (Neumann count, Dirichlet count, vector count) per fleet domain
COUNTS = {"diamond": (6, 5, 6), "disk": (8, 7, 8), "triangle": (6, 5, 6), "rectangle": (4, 2, 2)}


class Fleet:
    """Lazily computed meshes and eigenpairs at h = FLEET_H."""

    def __init__(self):
        self._cache = {}

    def _get(self, key, make):
        if key not in self._cache:
            self._cache[key] = make()
        return self._cache[key]

    def spec(self, name):
        return self._get(("spec", name), FLEET[name])

    def mesh(self, name):
        return self._get(("mesh", name), lambda: meshing.triangulate(self.spec(name), FLEET_H))

    def neumann(self, name):
        return self._get(("neu", name), lambda: solve_scalar(self.mesh(name), NEUMANN, COUNTS[name][0]))

    def dirichlet(self, name):
        return self._get(("dir", name), lambda: solve_scalar(self.mesh(name), DIRICHLET, COUNTS[name][1]))

    def vector(self, name):
        return self._get(("vec", name), lambda: solve_vector(self.mesh(name), COUNTS[name][2]))

    def classified(self, name):
        return self._get(("cls", name), lambda: analysis.classify_all(self.vector(name)))

    def solves(self):
        """Every eigensolve computed so far."""
        return {k: v for k, v in self._cache.items() if k[0] in ("neu", "dir", "vec")}


@pytest.fixture(scope="session")
def fleet():
    return Fleet()


# -- acceptance criteria reporting ------------------------------------------------

_CRITERIA = {}


def record(number, passed, detail):
    """Store a pass/fail line for one acceptance criterion."""
    _CRITERIA[number] = (bool(passed), detail)
    print(f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
