"""Exact rational weights for local quadrature and differentiation stencils.

All weights are derived by solving small Vandermonde systems in exact
rational arithmetic, then converted to floats once and cached.
"""

from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

import numpy as np


def _solve_exact(matrix, rhs):
    """Gauss-Jordan elimination over the rationals."""
    n = len(rhs)
    a = [list(row) + [rhs[i]] for i, row in enumerate(matrix)]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [v / p for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                fac = a[r][col]
                a[r] = [vr - fac * vc for vr, vc in zip(a[r], a[col])]
    return [a[i][n] for i in range(n)]


def _weights(nodes, moments):
    # sum_j w_j * nodes[j]**d == moments[d] for d < len(nodes)
    mat = [[Fraction(t) ** d for t in nodes] for d in range(len(nodes))]
    return _solve_exact(mat, [Fraction(m) for m in moments])


@lru_cache(maxsize=None)
def bernoulli_numbers(n):
    """B_0..B_n as Fractions (B_1 = -1/2)."""
    b = [Fraction(1)]
    for m in range(1, n + 1):
        b.append(-sum(comb(m + 1, k) * b[k] for k in range(m)) / (m + 1))
    return tuple(b)


@lru_cache(maxsize=None)
def gregory_corrections(order):
    """Left-end corrections c_j (units of h) for the trapezoid rule.

    Adding h*c_j to the trapezoid weight of node j (and mirrored at the
    right end) makes the rule exact for polynomials of degree < order.
    """
    bern = bernoulli_numbers(order + 1)
    rhs = [Fraction(0)] + [bern[d + 1] / (d + 1) for d in range(1, order)]
    return np.array([float(c) for c in _weights(range(order), rhs)])


@lru_cache(maxsize=None)
def cell_integral_weights(size):
    """Weights for integrating the degree size-1 interpolant over one cell.

    Returns an array W of shape (size - 1, size): row s gives the weights
    for the cell [s, s+1] when the stencil nodes are 0..size-1.
    """
    rows = []
    for s in range(size - 1):
        mom = [Fraction((s + 1) ** (d + 1) - s ** (d + 1), d + 1) for d in range(size)]
        rows.append([float(w) for w in _weights(range(size), mom)])
    return np.array(rows)


@lru_cache(maxsize=None)
def derivative_weights(size, order, at):
    """Weights for the `order`-th derivative at integer offset `at` of nodes 0..size-1."""
    mom = []
    for d in range(size):
        if d < order:
            mom.append(Fraction(0))
        else:
            mom.append(Fraction(factorial(d), factorial(d - order)) * Fraction(at) ** (d - order))
    return np.array([float(w) for w in _weights(range(size), mom)])
