"""Named example matrices used by the CLI, the tests and the demos."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .core import FormsMatrix
from .scalar import Scalar

THETA_BITS = 256
LIOUVILLE_TERMS = 5


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    note: str
    build: callable

    @property
    def matrix(self) -> FormsMatrix:
        return _load(self.id)

    def to_json(self):
        L = self.matrix
        return {"id": self.id, "note": self.note, "n": L.n, "m": L.m,
                "surrogate": L.surrogate_bits is not None, "all_rational": L.all_rational}


def _dyadic_root(poly, lo: Fraction, hi: Fraction, bits: int) -> Fraction:
    """Bisect an isolating interval of a sign-changing polynomial to width 2**-bits."""
    def f(x):
        acc = Fraction(0)
        for c in poly:
            acc = acc * x + c
        return acc

    flo = f(lo)
    if flo == 0:
        return lo
    if (flo > 0) == (f(hi) > 0):
        raise ValueError("interval does not isolate a root")
    while hi - lo > Fraction(1, 2 ** bits):
        mid = (lo + hi) / 2
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return lo


def _round_dyadic(x: Fraction, bits: int) -> Fraction:
    return Fraction(round(x * 2 ** bits), 2 ** bits)


def theta_pair(bits: int = THETA_BITS) -> FormsMatrix:
    """``(theta, theta^2)`` with ``theta = 2cos(2pi/7)`` as a dyadic surrogate.

    ``theta`` is the root of ``x^3 + x^2 - 2x - 1`` in ``(1, 2)``.  Both entries
    are within ``2**-(bits-2)`` of the true values.
    """
    th = _dyadic_root([1, 1, -2, -1], Fraction(1), Fraction(2), bits + 2)
    return FormsMatrix([[_round_dyadic(th, bits)], [_round_dyadic(th * th, bits)]],
                       surrogate_bits=bits - 2)


def liouville(terms: int = LIOUVILLE_TERMS) -> FormsMatrix:
    """Partial sum of ``sum 2**-(k!)``; its convergents have huge partial quotients.

    The denominator 64 already gives ``||64 x|| < 2**-17``, so the decay is
    visible at small horizons.
    """
    x = Fraction(0)
    f = 1
    for k in range(1, terms + 1):
        f *= k
        x += Fraction(1, 2 ** f)
    # the tail is below 2 * 2**-((terms+1)!)
    f *= terms + 1
    return FormsMatrix([[x]], surrogate_bits=f - 1)


ENTRIES = {
    "golden": CatalogEntry("golden", "golden ratio (1+sqrt5)/2, 1x1",
                           lambda: FormsMatrix([[(Scalar(1) + Scalar.sqrt(5)) / 2]])),
    "sqrt2": CatalogEntry("sqrt2", "sqrt 2, 1x1", lambda: FormsMatrix([[Scalar.sqrt(2)]])),
    "theta-pair": CatalogEntry(
        "theta-pair",
        f"theta=2cos(2pi/7) pair (theta, theta^2), cubic field, 2x1, {THETA_BITS}-bit rational surrogate",
        theta_pair),
    "liouville": CatalogEntry(
        "liouville", f"binary Liouville number truncated after {LIOUVILLE_TERMS} terms, 1x1 rational surrogate",
        liouville),
    "half-rational": CatalogEntry("half-rational", "rational degenerate 1x1, entry 1/2",
                                  lambda: FormsMatrix([[Fraction(1, 2)]])),
    "rational-pair": CatalogEntry("rational-pair", "rational degenerate 2x1, entries 1/3, 1/5",
                                  lambda: FormsMatrix([[Fraction(1, 3)], [Fraction(1, 5)]])),
}


@lru_cache(maxsize=None)
def _load(name: str) -> FormsMatrix:
    return ENTRIES[name].build()


def get(name: str) -> FormsMatrix:
    if name not in ENTRIES:
        raise KeyError(f"unknown catalog id {name!r}; known: {', '.join(ENTRIES)}")
    return _load(name)


def ids() -> list[str]:
    return list(ENTRIES)
