"""Vectorised float pre-filter for lattice scans.

Every scan here only *narrows* a candidate set; the callers re-decide each
surviving candidate with exact arithmetic.  Coefficients are reduced mod 1 and
split into two 22-bit heads plus a tail so that ``u * head`` is exact in
binary64 for ``|u| < 2**31``; the fractional parts of those products are then
exact as well, which keeps the absolute error of ``||sum_j u_j x_j - a||``
far below :data:`ERR`.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .errors import BoxTooLarge
from .scalar import Scalar

ERR = 2.0 ** -40
MAX_COORD = 2 ** 31 - 1
CHUNK = 1 << 20
DEFAULT_LIMIT = 200_000_000


def _split(x: Scalar) -> tuple[float, float, float]:
    lo, _ = x.enclosure(160)
    y = lo - math.floor(lo)
    h1 = Fraction(math.floor(y * 2 ** 22), 2 ** 22)
    h2 = Fraction(math.floor((y - h1) * 2 ** 44), 2 ** 44)
    return float(h1), float(h2), float(y - h1 - h2)


def _frac_of_product(c: np.ndarray, parts: tuple[float, float, float]) -> np.ndarray:
    h1, h2, h3 = parts
    p1 = c * h1
    p1 -= np.floor(p1)
    p2 = c * h2
    p2 -= np.floor(p2)
    p1 += p2
    p2 = np.multiply(c, h3, out=p2)
    p1 += p2
    return p1


class FloatForms:
    """Float images of a forms matrix for fast distance evaluation."""

    def __init__(self, L):
        self.n, self.m = L.n, L.m
        self.parts = [[_split(L.entry(j, i)) for i in range(L.m)] for j in range(L.n)]

    def dual_dist(self, U: np.ndarray) -> np.ndarray:
        """``max_i ||M_i(u)||`` for the rows of ``U`` (shape ``(N, n)``)."""
        out = np.zeros(U.shape[0])
        Uf = U.astype(np.float64)
        for i in range(self.m):
            s = np.zeros(U.shape[0])
            for j in range(self.n):
                s += _frac_of_product(Uf[:, j], self.parts[j][i])
            np.maximum(out, np.abs(s - np.rint(s)), out=out)
        return out

    def primal_dist(self, Qv: np.ndarray, alpha: Sequence[Scalar] | None) -> np.ndarray:
        """``||L_j(q) - alpha_j||`` for each row of ``Qv``; shape ``(N, n)``."""
        Qf = Qv.astype(np.float64)
        out = np.empty((Qv.shape[0], self.n))
        for j in range(self.n):
            s = np.zeros(Qv.shape[0])
            if alpha is not None:
                a1, a2, a3 = _split(alpha[j])
                s -= a1 + a2 + a3
            for i in range(self.m):
                s += _frac_of_product(Qf[:, i], self.parts[j][i])
            out[:, j] = np.abs(s - np.rint(s))
        return out


def box_count(ranges: Sequence[tuple[int, int]]) -> int:
    total = 1
    for lo, hi in ranges:
        total *= max(0, hi - lo + 1)
    return total


def check_box(ranges: Sequence[tuple[int, int]], limit: int) -> int:
    count = box_count(ranges)
    if count > limit:
        raise BoxTooLarge(count, limit)
    if any(max(abs(lo), abs(hi)) > MAX_COORD for lo, hi in ranges):
        raise BoxTooLarge(count, limit)
    return count


def iter_box(ranges: Sequence[tuple[int, int]], chunk: int = CHUNK) -> Iterator[np.ndarray]:
    """Yield the integer points of a box in lexicographic order, in chunks."""
    sizes = [hi - lo + 1 for lo, hi in ranges]
    total = box_count(ranges)
    lows = np.array([lo for lo, _ in ranges], dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        cols = []
        for size in reversed(sizes):
            idx, rem = np.divmod(idx, size)
            cols.append(rem)
        yield np.stack(cols[::-1], axis=1) + lows


def canonical_mask(U: np.ndarray) -> np.ndarray:
    """Rows whose first nonzero entry is positive (zero rows excluded)."""
    if U.shape[1] == 1:
        return U[:, 0] > 0
    nz = U != 0
    first = np.argmax(nz, axis=1)
    lead = U[np.arange(U.shape[0]), first]
    return lead > 0


def scan_dual_threshold(ff: FloatForms, ranges, bound: float, canonical: bool = True,
                        limit: int = DEFAULT_LIMIT) -> tuple[list[tuple[int, ...]], int]:
    """Points of the box with float ``max_i ||M_i(u)|| <= bound + ERR``."""
    count = check_box(ranges, limit)
    hits: list[tuple[int, ...]] = []
    for U in iter_box(ranges):
        if canonical:
            U = U[canonical_mask(U)]
        d = ff.dual_dist(U)
        sel = U[d <= bound + ERR]
        hits.extend(tuple(int(c) for c in row) for row in sel)
    return hits, count


def scan_min(values_fn, ranges, canonical: bool, limit: int = DEFAULT_LIMIT,
             rel: float = 1e-9) -> tuple[list[tuple[int, ...]], int]:
    """Candidates that may attain the minimum of a float objective.

    ``values_fn(U)`` returns ``(value, abs_err)`` arrays.  A point survives when
    its lower bound is at most the smallest upper bound seen over the whole box.
    """
    count = check_box(ranges, limit)
    best_hi = math.inf
    pool: list[tuple[float, tuple[int, ...]]] = []
    for U in iter_box(ranges):
        if canonical:
            U = U[canonical_mask(U)]
        else:
            U = U[np.any(U != 0, axis=1)]
        if U.shape[0] == 0:
            continue
        val, err = values_fn(U)
        lo = val - err - rel * val
        hi = val + err + rel * val
        best_hi = min(best_hi, float(hi.min()))
        keep = lo <= best_hi
        pool.extend((float(l), tuple(int(c) for c in row)) for l, row in zip(lo[keep], U[keep]))
        pool = [p for p in pool if p[0] <= best_hi]
    return [p[1] for p in pool], count
