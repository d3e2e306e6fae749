"""Independent brute-force oracle at 512-bit precision.

Nothing here touches the package's scanning or exact-comparison code: values
are evaluated with mpmath directly from (a, b, d) and minimised by plain loops.
"""
from __future__ import annotations

import itertools

import mpmath

PREC = 512
# the package itself never imports mpmath, so the global context is ours
mpmath.mp.prec = PREC
TOL = mpmath.mpf(2) ** -400


def mpf(x):
    """mpmath value of a Scalar, Fraction or int."""
    with mpmath.workprec(PREC):
        if hasattr(x, "d"):
            a = mpmath.mpf(x.a.numerator) / x.a.denominator
            if x.b == 0:
                return a
            return a + mpmath.mpf(x.b.numerator) / x.b.denominator * mpmath.sqrt(x.d)
        if hasattr(x, "numerator"):
            return mpmath.mpf(x.numerator) / x.denominator
        return mpmath.mpf(x)


def dist(x):
    with mpmath.workprec(PREC):
        return abs(x - mpmath.nint(x))


def rpow(x, e):
    with mpmath.workprec(PREC):
        return mpmath.power(x, mpf(e))


def entries(L):
    return [[mpf(L.entry(j, i)) for i in range(L.m)] for j in range(L.n)]


def _nonzero(dim, H):
    for v in itertools.product(range(-H, H + 1), repeat=dim):
        if any(v):
            yield v


def _argmin(items):
    best = min(val for val, _ in items)
    return best, [w for val, w in items if val <= best + TOL]


def primal(L, k, Q, alpha=None):
    """``min_{0<|q|<=Q} max_j |q|^(m k_j) ||L_j(q) - alpha_j||`` and all minimisers."""
    X = entries(L)
    al = [mpf(a) for a in alpha] if alpha is not None else [0] * L.n
    items = []
    with mpmath.workprec(PREC):
        for q in _nonzero(L.m, Q):
            sup = max(abs(c) for c in q)
            val = max(rpow(sup, k.exponent(j)) * dist(sum(q[i] * X[j][i] for i in range(L.m)) - al[j])
                      for j in range(L.n))
            items.append((val, q))
    return _argmin(items)


def dual(L, k, U):
    """``min_{0<|u|<=U} (max_j |u_j|^(1/(m k_j))) max_i ||M_i(u)||`` and all minimisers."""
    X = entries(L)
    items = []
    with mpmath.workprec(PREC):
        for u in _nonzero(L.n, U):
            w = max(rpow(abs(u[j]), 1 / k.exponent(j)) for j in range(L.n))
            err = max(dist(sum(u[j] * X[j][i] for j in range(L.n))) for i in range(L.m))
            items.append((w * err, u))
    return _argmin(items)


def annulus_best(L, k, gamma, T, umax):
    """Brute-force z(T) for n = m = 1: minimal phi, then minimal u, in the annulus."""
    x = entries(L)[0][0]
    g = mpf(gamma)
    T = mpf(T)
    best = None
    with mpmath.workprec(PREC):
        for u in range(1, umax + 1):
            phi = dist(u * x)
            in_big = u <= T / g + TOL and phi <= g / T + TOL
            in_small = u <= T + TOL and phi <= g / T + TOL
            if in_big and not in_small:
                if best is None or phi < best[0] - TOL:
                    best = (phi, u)
    return best
