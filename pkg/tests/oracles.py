"""Independent reference values for the tests.

Bessel functions are evaluated from the integral representation
J_n(x) = (1/2pi) int_0^{2pi} cos(n t - x sin t) dt with the trapezoidal rule
(spectrally accurate for a periodic integrand), and roots are found by
bisection.  Nothing here calls the library under test or scipy.special.
"""

import math

import numpy as np

_T = np.linspace(0.0, 2 * math.pi, 128, endpoint=False)


def bessel_j(n, x):
    return float(np.mean(np.cos(n * _T - x * np.sin(_T))))


def bessel_jp(n, x):
    if n == 0:
        return -bessel_j(1, x)
    return 0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x))


def bisect(f, a, b, tol=1e-14):
    fa = f(a)
    for _ in range(200):
        m = 0.5 * (a + b)
        fm = f(m)
        if fa * fm <= 0:
            b = m
        else:
            a, fa = m, fm
        if b - a < tol:
            break
    return 0.5 * (a + b)


def first_root(f, start=0.1, step=0.01, stop=30.0):
    """First sign change of ``f`` on a grid, refined by bisection."""
    x, fx = start, f(start)
    while x < stop:
        y = x + step
        fy = f(y)
        if fx * fy < 0:
            return bisect(f, x, y)
        x, fx = y, fy
    raise ValueError("no root found")


def j_zero(n):
    return first_root(lambda x: bessel_j(n, x))


def jp_zero(n):
    # J_n' vanishes at 0 for n >= 2; start past it
    return first_root(lambda x: bessel_jp(n, x), start=0.5)


# first eigenvalues of the unit disk
DISK_MU2 = jp_zero(1) ** 2      # Neumann, double
DISK_LAMBDA1 = j_zero(0) ** 2   # Dirichlet, simple
DISK_MU4 = jp_zero(2) ** 2      # Neumann, double
DISK_LAMBDA2 = j_zero(1) ** 2   # Dirichlet, double
DISK_MU_RADIAL = jp_zero(0) ** 2  # Neumann, simple; equals DISK_LAMBDA2


def square_spectrum(side, count, dirichlet=False):
    """Eigenvalues pi^2 (m^2 + n^2) / side^2 with multiplicity, ascending."""
    lo = 1 if dirichlet else 0
    vals = sorted(math.pi ** 2 * (m * m + n * n) / side ** 2
                  for m in range(lo, 12) for n in range(lo, 12))
    return vals[:count]


def half_square_spectrum(count, dirichlet=False):
    """Triangle (0,0),(2,0),(1,1): half of the square of side sqrt 2."""
    if dirichlet:
        vals = [m * m + n * n for m in range(1, 12) for n in range(1, m)]
    else:
        vals = [m * m + n * n for m in range(0, 12) for n in range(0, m + 1)]
    return [math.pi ** 2 * v / 2 for v in sorted(vals)[:count]]


def rectangle_spectrum(a, b, count, dirichlet=False):
    lo = 1 if dirichlet else 0
    vals = sorted(math.pi ** 2 * (m * m / a ** 2 + n * n / b ** 2)
                  for m in range(lo, 12) for n in range(lo, 12))
    return vals[:count]


def triangle_psi2(x, y):
    """Second Neumann eigenfunction of the lip triangle, increasing in x."""
    return -np.cos(np.pi * x / 2) * np.cos(np.pi * y / 2)
