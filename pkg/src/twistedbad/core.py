"""Weights, forms matrices, integer vectors and the exact primitives on them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DimensionError, MixedFieldError
from .scalar import PowScalar, Scalar, as_fraction, common_field, nearest_int_dist


class IntVector(tuple):
    """Immutable integer vector with cached sup-norm and squared Euclidean norm."""

    def __new__(cls, components: Iterable[int]):
        comps = [int(c) for c in components]
        obj = super().__new__(cls, comps)
        obj._sup = max((abs(c) for c in comps), default=0)
        obj._norm_sq = sum(c * c for c in comps)
        return obj

    @property
    def sup_norm(self) -> int:
        return self._sup

    @property
    def norm_sq(self) -> int:
        return self._norm_sq

    def is_zero(self) -> bool:
        return self._sup == 0

    def __neg__(self):
        return IntVector(-c for c in self)

    def canonical(self) -> "IntVector":
        """Sign representative whose first nonzero component is positive."""
        for c in self:
            if c:
                return self if c > 0 else -self
        return self

    def is_canonical(self) -> bool:
        for c in self:
            if c:
                return c > 0
        return True

    def __repr__(self):
        return f"IntVector({list(self)})"


@dataclass(frozen=True)
class WeightVector:
    """Weights ``k_1..k_n`` (positive rationals summing to 1) for ``m`` variables."""

    m: int
    k: tuple[Fraction, ...]
    perm: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        k = tuple(as_fraction(x) for x in self.k)
        if self.m < 1:
            raise ValueError("m must be positive")
        if not k:
            raise ValueError("need at least one weight")
        if any(x <= 0 for x in k):
            raise ValueError(f"weights must be positive: {k}")
        if sum(k) != 1:
            raise ValueError(f"weights must sum to 1, got {sum(k)}")
        object.__setattr__(self, "k", k)
        top = max(range(len(k)), key=lambda j: (k[j], -j))
        perm = (top,) + tuple(j for j in range(len(k)) if j != top)
        object.__setattr__(self, "perm", perm)

    @classmethod
    def uniform(cls, n: int, m: int) -> "WeightVector":
        return cls(m, tuple(Fraction(1, n) for _ in range(n)))

    @classmethod
    def parse(cls, text: str, m: int) -> "WeightVector":
        return cls(m, tuple(Fraction(p.strip()) for p in text.split(",")))

    @property
    def n(self) -> int:
        return len(self.k)

    @property
    def top(self) -> int:
        """Original index of the (first) maximal weight."""
        return self.perm[0]

    @property
    def k1(self) -> Fraction:
        return self.k[self.perm[0]]

    def exponent(self, j: int) -> Fraction:
        """``m * k_j``."""
        return self.m * self.k[j]

    def permuted(self) -> tuple[Fraction, ...]:
        return tuple(self.k[j] for j in self.perm)

    def to_json(self):
        return {"m": self.m, "k": [str(x) for x in self.k]}


class FormsMatrix:
    """``n x m`` matrix of exact scalars; row j holds the coefficients of ``L_j``."""

    def __init__(self, rows: Sequence[Sequence], surrogate_bits: int | None = None):
        rows = [[Scalar.coerce(x) if not isinstance(x, str) else Scalar(Fraction(x)) for x in row]
                for row in rows]
        if not rows or not rows[0]:
            raise DimensionError("empty matrix")
        m = len(rows[0])
        if any(len(r) != m for r in rows):
            raise DimensionError("ragged matrix")
        self.rows = tuple(tuple(r) for r in rows)
        self.n = len(rows)
        self.m = m
        self.d = common_field(x for r in rows for x in r)
        self.surrogate_bits = surrogate_bits

    def entry(self, j: int, i: int) -> Scalar:
        return self.rows[j][i]

    def transpose(self) -> "FormsMatrix":
        return FormsMatrix([[self.rows[j][i] for j in range(self.n)] for i in range(self.m)],
                           self.surrogate_bits)

    def permute_rows(self, perm: Sequence[int]) -> "FormsMatrix":
        return FormsMatrix([self.rows[j] for j in perm], self.surrogate_bits)

    @property
    def all_rational(self) -> bool:
        return all(x.is_rational for r in self.rows for x in r)

    def __eq__(self, other):
        return isinstance(other, FormsMatrix) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return f"FormsMatrix({[[str(x) for x in r] for r in self.rows]})"

    def to_json(self) -> dict:
        out = {"n": self.n, "m": self.m,
               "rows": [[x.to_json() for x in r] for r in self.rows]}
        if self.surrogate_bits is not None:
            out["surrogate_bits"] = self.surrogate_bits
        return out

    @classmethod
    def from_json(cls, obj) -> "FormsMatrix":
        rows = [[Scalar.from_json(x) for x in r] for r in obj["rows"]]
        mat = cls(rows, obj.get("surrogate_bits"))
        if "n" in obj and (obj["n"], obj["m"]) != (mat.n, mat.m):
            raise DimensionError("declared shape does not match rows")
        return mat


@dataclass(frozen=True)
class PrecisionBudget:
    """Working precision plus the horizon guard for rational surrogates.

    A surrogate carries an error below ``2**-surrogate_bits`` per entry, so the
    forms at ``|q|_inf <= Q`` are trusted only while ``Q * 2**-surrogate_bits``
    stays under ``tolerance``.
    """

    bits: int = 128
    max_bits: int = 4096
    tolerance: Fraction = Fraction(1, 2 ** 32)

    def horizon(self, matrix: FormsMatrix) -> int | None:
        if matrix.surrogate_bits is None:
            return None
        return int(self.tolerance * 2 ** matrix.surrogate_bits)

    def check_horizon(self, matrix: FormsMatrix, Q: int) -> None:
        h = self.horizon(matrix)
        if h is not None and Q > h:
            raise ValueError(f"horizon {Q} exceeds the surrogate guard {h}")


def eval_primal_forms(L: FormsMatrix, q: Sequence[int]) -> list[Scalar]:
    """``(L_1(q), ..., L_n(q))`` with ``L_j(q) = sum_i q_i x_ji``."""
    if len(q) != L.m:
        raise DimensionError(f"q has length {len(q)}, expected m={L.m}")
    out = []
    for row in L.rows:
        acc = Scalar(0)
        for qi, x in zip(q, row):
            if qi:
                acc = acc + x * qi
        out.append(acc)
    return out


def eval_dual_forms(L: FormsMatrix, u: Sequence[int]) -> list[Scalar]:
    """``(M_1(u), ..., M_m(u))`` with ``M_i(u) = sum_j u_j x_ji``."""
    if len(u) != L.n:
        raise DimensionError(f"u has length {len(u)}, expected n={L.n}")
    out = []
    for i in range(L.m):
        acc = Scalar(0)
        for j, uj in enumerate(u):
            if uj:
                acc = acc + L.rows[j][i] * uj
        out.append(acc)
    return out


def dual_error(L: FormsMatrix, u: Sequence[int]) -> Scalar:
    """``max_i ||M_i(u)||``."""
    return max(nearest_int_dist(x) for x in eval_dual_forms(L, u))


def weighted_norm(u: Sequence[int], k: WeightVector) -> PowScalar:
    """``max_j |u_j|^(1/(m k_j))`` as an exact PowScalar."""
    if len(u) != k.n:
        raise DimensionError("u and k disagree in length")
    best = PowScalar(0, 1, 0)
    for j, uj in enumerate(u):
        if uj:
            v = PowScalar(abs(uj), 1 / k.exponent(j), 1)
            if v.cmp(best) > 0:
                best = v
    return best


def cmp_weighted_norm(u: Sequence[int], k: WeightVector, t) -> str:
    """Compare ``max_j |u_j|^(1/(m k_j))`` with ``t > 0``: one of '<', '=', '>'.

    Each coordinate is decided by clearing exponents: with ``m k_j = P/Q`` in
    lowest terms, ``|u_j|^(Q/P)`` against ``t`` becomes ``|u_j|^Q`` against ``t^P``.
    """
    t = as_fraction(t)
    if t <= 0:
        raise ValueError("t must be positive")
    result = "<"
    for j, uj in enumerate(u):
        e = k.exponent(j)
        lhs = Fraction(abs(uj)) ** e.denominator
        rhs = t ** e.numerator
        if lhs > rhs:
            return ">"
        if lhs == rhs:
            result = "="
    return result


@dataclass(frozen=True)
class FullRank:
    full = True


@dataclass(frozen=True)
class Deficient:
    witness: IntVector
    full = False


def _rational_nullspace(rows: list[list[Fraction]], ncols: int) -> list[list[Fraction]]:
    """Basis of ``{x : rows @ x = 0}`` by Gauss-Jordan elimination over Q."""
    mat = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        pv = mat[r][c]
        mat[r] = [x / pv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        x = [Fraction(0)] * ncols
        x[fc] = Fraction(1)
        for row_i, pc in enumerate(pivots):
            x[pc] = -mat[row_i][fc]
        basis.append(x)
    return basis


def rank_classify(L: FormsMatrix) -> FullRank | Deficient:
    """Decide whether ``L^T Z^n + Z^m`` has rank ``n+m``.

    Writing ``x_ji = a_ji + b_ji sqrt(d)``, an integer ``u`` has ``L^T u``
    integral iff ``sum_j u_j b_ji = 0`` for all i and ``sum_j u_j a_ji`` is an
    integer.  Any rational solution of the first system can be scaled to
    satisfy the second, so deficiency is exactly a nontrivial kernel of the
    irrational parts.
    """
    n, m = L.n, L.m
    B = [[L.rows[j][i].b for j in range(n)] for i in range(m)]
    kernel = _rational_nullspace(B, n)
    if not kernel:
        return FullRank()
    x = kernel[0]
    den = math.lcm(*(c.denominator for c in x))
    ints = [int(c * den) for c in x]
    g = math.gcd(*ints)
    u = [c // g for c in ints]
    scale = 1
    for i in range(m):
        s = sum((L.rows[j][i].a * u[j] for j in range(n)), Fraction(0))
        scale = math.lcm(scale, s.denominator)
    w = IntVector(c * scale for c in u).canonical()
    return Deficient(w)


def is_integral_vector(values: Iterable[Scalar]) -> bool:
    return all(v.is_rational and v.a.denominator == 1 for v in values)
