"""Independent reference computations used across the test modules.

Everything here is deliberately written from the defining formulas with
no imports from the package internals beyond basis evaluation, so the
library and the oracle cannot share a bug in the quantities under test.
"""

import math

import numpy as np

from trigcolloc import lagrange as lg
from trigcolloc.coeffs import WeightKind


def adaptive_simpson(f, a, b, tol=1e-13, max_depth=60):
    """Classic adaptive Simpson with Richardson correction."""

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) * (fa + 4.0 * flm + fm) / 6.0
        right = (b - m) * (fm + 4.0 * frm + fb) / 6.0
        if depth >= max_depth or abs(left + right - whole) < 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return recurse(a, m, fa, flm, fm, left, tol / 2.0, depth + 1) + recurse(
            m, b, fm, frm, fb, right, tol / 2.0, depth + 1
        )

    m = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m), f(b)
    whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0
    return recurse(a, b, fa, fm, fb, whole, tol, 0)


def safe_sinc(x):
    if abs(x) < 1e-4:
        x2 = x * x
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0 - x2 * x2 * x2 / 5040.0
    return math.sin(x) / x


def defining_weight(ns, kind, j, lam, i=None):
    """Weight from its defining integral, by adaptive quadrature."""
    if kind is WeightKind.Q:
        f = lambda z: lg.eval_basis(ns, j, z) * (1.0 - z) * safe_sinc((1.0 - z) * lam)
    elif kind is WeightKind.P:
        f = lambda z: lg.eval_basis(ns, j, z) * math.cos((1.0 - z) * lam)
    else:
        ci = ns.nodes[i]
        f = lambda z: (
            lg.eval_basis(ns, j, ci * z) * (1.0 - z) * safe_sinc((1.0 - z) * ci * lam)
        )
    return adaptive_simpson(f, 0.0, 1.0)


def fd_gradient(func, x, eps=1e-6):
    """Central finite-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    for k in range(x.size):
        step = np.zeros_like(x)
        step[k] = eps
        grad[k] = (func(x + step) - func(x - step)) / (2.0 * eps)
    return grad
