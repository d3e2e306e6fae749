"""The box Pi_T, the constant gamma, and best-approximation vectors z(T).

Coordinates are kept in the caller's original order throughout; the weight
permutation of :class:`~twistedbad.core.WeightVector` only decides which
coordinate plays the role of ``u_1`` (the one with maximal weight).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from . import _scan
from .core import (
    Deficient,
    FormsMatrix,
    IntVector,
    PrecisionBudget,
    WeightVector,
    dual_error,
    eval_dual_forms,
    rank_classify,
    weighted_norm,
)
from .errors import AuditFailure, DegenerateRank, DimensionError, NoPoint
from .scalar import PowScalar, Scalar, as_fraction, fmt_decimal

Number = Union[int, Fraction, Scalar]

GAMMA_SHRINK = 1 - Fraction(1, 2 ** 16)


def _sc(x) -> Scalar:
    return Scalar.coerce(x)


def _pow(base, e) -> PowScalar:
    return PowScalar(base, e, 1)


def _le_bound(a: int, beta: Number, T: Fraction, e: Fraction) -> bool:
    """Exact ``a <= beta * T**e``."""
    return PowScalar(T, e, _sc(beta)).cmp(a) >= 0


def int_bound(beta: Number, T: Fraction, e: Fraction) -> int:
    """Largest integer ``a >= 0`` with ``a <= beta * T**e``."""
    approx = float(_sc(beta)) * float(T) ** float(e)
    a = max(0, int(math.floor(approx)) - 1)
    while _le_bound(a + 1, beta, T, e):
        a += 1
    while a > 0 and not _le_bound(a, beta, T, e):
        a -= 1
    return a


@dataclass(frozen=True)
class BoxParams:
    """``T >= 1`` and the n+1 positive scale factors of Pi_T."""

    T: Fraction
    beta: tuple

    def __post_init__(self):
        T = as_fraction(self.T)
        if T < 1:
            raise ValueError("T must be >= 1")
        beta = tuple(x if isinstance(x, Scalar) else as_fraction(x) for x in self.beta)
        if any(_sc(b).sign() <= 0 for b in beta):
            raise ValueError("box scales must be positive")
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "beta", beta)

    @classmethod
    def standard(cls, k: WeightVector, gamma: Number, T, large: bool) -> "BoxParams":
        """``Pi_T(gamma^-m, 1, ..., 1, gamma)`` (large) or ``Pi_T(1, ..., 1, gamma)``."""
        beta = [Fraction(1)] * k.n + [gamma]
        if large:
            beta[k.top] = (_sc(1) / _sc(gamma) ** k.m) if isinstance(gamma, Scalar) \
                else Fraction(1) / as_fraction(gamma) ** k.m
        return cls(as_fraction(T), tuple(beta))


def side_lengths(k: WeightVector, params: BoxParams) -> list[tuple[Number, Fraction]]:
    """Edge lengths of Pi_T as ``(coefficient, exponent of T)`` pairs."""
    n, m = k.n, k.m
    sides = [(2 * params.beta[j], k.exponent(j)) for j in range(n)]
    sides += [(2 * params.beta[n], Fraction(-1))] * m
    return sides


def box_volume(k: WeightVector, params: BoxParams) -> Number:
    """Exact volume of Pi_T, i.e. the product of its side lengths."""
    coeff: Number = Fraction(1)
    texp = Fraction(0)
    for c, e in side_lengths(k, params):
        coeff = coeff * c
        texp += e
    if texp.denominator != 1:
        return PowScalar(params.T, texp, _sc(coeff))
    return coeff * params.T ** int(texp)


def box_membership(u: Sequence[int], v: Sequence[int], L: FormsMatrix, k: WeightVector,
                   params: BoxParams) -> bool:
    """Closed-box membership of ``(u, v)`` in Pi_T, decided exactly."""
    if len(u) != L.n or len(v) != L.m:
        raise DimensionError("(u, v) does not match the matrix shape")
    for j, uj in enumerate(u):
        if not _le_bound(abs(uj), params.beta[j], params.T, k.exponent(j)):
            return False
    err = max(abs(x - vi) for x, vi in zip(eval_dual_forms(L, u), v))
    return err <= _sc(params.beta[L.n]) / params.T


def _round_vec(L: FormsMatrix, u) -> IntVector:
    return IntVector(x.round_half_even() for x in eval_dual_forms(L, u))


def enumerate_box(L: FormsMatrix, k: WeightVector, params: BoxParams,
                  limit: int = 10_000_000) -> list[tuple[IntVector, IntVector]]:
    """All nonzero integer points of Pi_T up to sign, lexicographic in ``u``."""
    n, m = L.n, L.m
    bounds = [int_bound(params.beta[j], params.T, k.exponent(j)) for j in range(n)]
    vbound_exact = _sc(params.beta[n]) / params.T
    ranges = [(0, bounds[0])] + [(-b, b) for b in bounds[1:]]
    hits, _ = _scan.scan_dual_threshold(_scan.FloatForms(L), ranges, float(vbound_exact),
                                        canonical=True, limit=limit)
    out = []
    for u in hits:
        u = IntVector(u)
        v = _round_vec(L, u)
        if dual_error(L, u) <= vbound_exact:
            out.append((u, v))
    vb = vbound_exact.floor()
    if vb >= 1:
        zero = IntVector([0] * n)
        for vv in _scan.iter_box([(-vb, vb)] * m):
            for row in vv:
                v = IntVector(int(c) for c in row)
                if not v.is_zero() and v.is_canonical():
                    out.append((zero, v))
    out.sort(key=lambda p: (tuple(p[0]), tuple(p[1])))
    return out


@dataclass
class GammaEstimate:
    value: PowScalar
    lo: Fraction
    hi: Fraction
    witness: IntVector
    gamma_rat: Fraction
    U: int

    def to_json(self):
        return {"U": self.U, "witness": list(self.witness),
                "gamma_lo": fmt_decimal(self.lo, 25), "gamma_hi": fmt_decimal(self.hi, 25, up=True),
                "gamma_exact": self.value.to_json(), "gamma_rat": str(self.gamma_rat)}


def _dual_objective(ff: _scan.FloatForms, k: WeightVector):
    inv = np.array([1.0 / float(k.exponent(j)) for j in range(k.n)])

    def fn(U):
        w = np.max(np.abs(U).astype(np.float64) ** inv, axis=1)
        d = ff.dual_dist(U)
        return w * d, w * _scan.ERR
    return fn


def dual_minimum(L: FormsMatrix, k: WeightVector, U: int, limit: int = _scan.DEFAULT_LIMIT):
    """Exact minimiser of ``weighted_norm(u) * max_i ||M_i(u)||`` over ``0 < |u| <= U``."""
    if U < 1:
        raise ValueError("horizon U must be >= 1")
    ranges = [(0, U)] + [(-U, U)] * (L.n - 1)
    cands, _ = _scan.scan_min(_dual_objective(_scan.FloatForms(L), k), ranges,
                              canonical=True, limit=limit)
    best = None
    for u in sorted(cands):
        u = IntVector(u)
        val = weighted_norm(u, k).times(dual_error(L, u))
        if best is None or val.cmp(best[0]) < 0:
            best = (val, u)
    return best


def require_full_rank(L: FormsMatrix, allow_surrogate: bool = False) -> None:
    """Raise DegenerateRank unless L has full rank.

    A rational surrogate of a real matrix is always deficient; with
    ``allow_surrogate`` the check is skipped for matrices flagged as
    surrogates and the horizon guard of the PrecisionBudget takes over.
    """
    if allow_surrogate and L.surrogate_bits is not None:
        return
    rk = rank_classify(L)
    if isinstance(rk, Deficient):
        raise DegenerateRank(rk.witness)


def estimate_gamma(L: FormsMatrix, k: WeightVector, U: int,
                   budget: PrecisionBudget = PrecisionBudget(),
                   allow_surrogate: bool = False) -> GammaEstimate:
    """Finite-horizon dual constant gamma_U with a certified enclosure."""
    if k.n != L.n or k.m != L.m:
        raise DimensionError("weights do not match the matrix")
    require_full_rank(L, allow_surrogate)
    budget.check_horizon(L, U)
    value, witness = dual_minimum(L, k, U)
    lo, hi = value.enclosure(budget.bits)
    return GammaEstimate(value, lo, hi, witness, lo * GAMMA_SHRINK, U)


@dataclass(frozen=True)
class CounterexamplePoint:
    u: IntVector
    v: IntVector

    def __bool__(self):
        return False


def check_gamma_empty(L: FormsMatrix, k: WeightVector, gamma: Number, T) -> Union[bool, CounterexamplePoint]:
    """True iff Pi_T(1, ..., 1, gamma) contains no integer point but 0."""
    g = _sc(gamma)
    if not (0 < g < 1):
        raise ValueError("gamma must lie in (0, 1)")
    T = as_fraction(T)
    bounds = [int_bound(1, T, k.exponent(j)) for j in range(L.n)]
    vb = g / T
    ranges = [(0, bounds[0])] + [(-b, b) for b in bounds[1:]]
    hits, _ = _scan.scan_dual_threshold(_scan.FloatForms(L), ranges, float(vb), canonical=True)
    for u in sorted(hits):
        u = IntVector(u)
        if dual_error(L, u) <= vb:
            return CounterexamplePoint(u, _round_vec(L, u))
    return True


@dataclass
class BestApproxRecord:
    T: Fraction
    u: IntVector
    v: IntVector
    phi: Scalar
    stats: dict = field(default_factory=dict)

    def to_json(self):
        return {"T": str(self.T), "u": list(self.u), "v": list(self.v),
                "phi": self.phi.to_json(), "stats": dict(self.stats)}

    @classmethod
    def from_json(cls, obj):
        return cls(Fraction(obj["T"]), IntVector(obj["u"]), IntVector(obj["v"]),
                   Scalar.from_json(obj["phi"]), dict(obj.get("stats", {})))


def best_approx(L: FormsMatrix, k: WeightVector, gamma: Number, T,
                tie_break: str = "phi-first") -> BestApproxRecord:
    """Best-approximation vector z(T) in the large box minus the small box.

    Admissible points are sign-normalised so that the maximal-weight
    coordinate is positive.  ``tie_break="phi-first"`` minimises the dual error,
    then that coordinate, then lexicographic order; ``"u1-first"`` minimises the
    coordinate first.
    """
    if tie_break not in ("phi-first", "u1-first"):
        raise ValueError(f"unknown tie_break {tie_break!r}")
    T = as_fraction(T)
    g = _sc(gamma)
    top = k.top
    e1 = k.exponent(top)
    ranges = []
    for j in range(L.n):
        if j == top:
            lo = int_bound(1, T, e1) + 1
            hi = int_bound(_sc(1) / g ** k.m, T, e1)
            ranges.append((lo, hi))
        else:
            b = int_bound(1, T, k.exponent(j))
            ranges.append((-b, b))
    vb = g / T
    stats = {"enumerated": _scan.box_count(ranges), "candidates": 0, "admissible": 0}
    if ranges[top][0] > ranges[top][1]:
        raise NoPoint(f"empty annulus at T={T}")
    hits, _ = _scan.scan_dual_threshold(_scan.FloatForms(L), ranges, float(vb), canonical=False)
    stats["candidates"] = len(hits)
    admissible = []
    for u in hits:
        u = IntVector(u)
        phi = dual_error(L, u)
        if phi <= vb:
            admissible.append((phi, u))
    stats["admissible"] = len(admissible)
    if not admissible:
        raise NoPoint(f"no admissible point at T={T}, gamma={gamma}")

    def key_phi(p):
        return p[1][top], tuple(p[1])

    if tie_break == "phi-first":
        best_phi = min(p[0] for p in admissible)
        pool = [p for p in admissible if p[0] == best_phi]
    else:
        low = min(p[1][top] for p in admissible)
        pool = [p for p in admissible if p[1][top] == low]
        best_phi = min(p[0] for p in pool)
        pool = [p for p in pool if p[0] == best_phi]
    phi, u = min(pool, key=key_phi)
    return BestApproxRecord(T, u, _round_vec(L, u), phi, stats)


def compute_R(gamma, k: WeightVector) -> int:
    """``ceil(gamma^(-1/k_1)) + 1`` decided exactly."""
    g = _sc(gamma)
    k1 = k.k1
    p, q = k1.numerator, k1.denominator
    # c >= gamma^(-q/p)  <=>  c^p * gamma^q >= 1
    c = max(1, int(math.floor(float(g) ** (-1.0 / float(k1)))) - 1)
    while (g ** q) * c ** p < 1:
        c += 1
    while c > 1 and (g ** q) * (c - 1) ** p >= 1:
        c -= 1
    return c + 1


@dataclass
class AuditEntry:
    r: int
    name: str
    ok: bool
    margin_lo: str
    margin_hi: str

    def to_json(self):
        return {"r": self.r, "name": self.name, "ok": self.ok,
                "margin_lo": self.margin_lo, "margin_hi": self.margin_hi}


@dataclass
class AuditReport:
    entries: list[AuditEntry]

    @property
    def passed(self) -> bool:
        return all(e.ok for e in self.entries)

    @property
    def failures(self) -> list[AuditEntry]:
        return [e for e in self.entries if not e.ok]

    def for_record(self, r: int) -> dict:
        return {e.name: {"ok": e.ok, "margin_lo": e.margin_lo, "margin_hi": e.margin_hi}
                for e in self.entries if e.r == r}

    def to_json(self):
        return {"passed": self.passed, "entries": [e.to_json() for e in self.entries]}


def _margin(big, small, bits=96) -> tuple[str, str]:
    """Enclosure of ``big - small`` as decimal strings."""
    def enc(x):
        if isinstance(x, PowScalar):
            return x.enclosure(bits)
        return _sc(x).enclosure(bits)
    blo, bhi = enc(big)
    slo, shi = enc(small)
    return fmt_decimal(blo - shi, 12), fmt_decimal(bhi - slo, 12, up=True)


@dataclass
class ApproxSequence:
    gamma: Fraction
    R: int
    records: list[BestApproxRecord]
    audit: AuditReport | None = None
    gamma_history: list[Fraction] = field(default_factory=list)
    matrix: FormsMatrix | None = None
    weights: WeightVector | None = None

    @property
    def u_vectors(self) -> list[IntVector]:
        return [rec.u for rec in self.records]

    def to_json(self) -> dict:
        recs = []
        for r, rec in enumerate(self.records):
            d = {"r": r, "T": str(rec.T), "u": list(rec.u), "v": list(rec.v),
                 "phi": rec.phi.to_json(), "stats": rec.stats}
            if self.audit is not None:
                d["audit"] = self.audit.for_record(r)
            recs.append(d)
        out = {"gamma": str(self.gamma), "R": self.R, "records": recs,
               "gamma_history": [str(g) for g in self.gamma_history]}
        if self.audit is not None:
            out["audit_passed"] = self.audit.passed
        if self.matrix is not None:
            out["matrix"] = self.matrix.to_json()
        if self.weights is not None:
            out["weights"] = self.weights.to_json()
            out["perm"] = list(self.weights.perm)
        return out

    @classmethod
    def from_json(cls, obj) -> "ApproxSequence":
        recs = [BestApproxRecord(Fraction(d["T"]), IntVector(d["u"]), IntVector(d["v"]),
                                 Scalar.from_json(d["phi"]), dict(d.get("stats", {})))
                for d in obj["records"]]
        matrix = FormsMatrix.from_json(obj["matrix"]) if "matrix" in obj else None
        weights = None
        if "weights" in obj:
            w = obj["weights"]
            weights = WeightVector(w["m"], tuple(Fraction(x) for x in w["k"]))
        return cls(Fraction(obj["gamma"]), int(obj["R"]), recs, None,
                   [Fraction(g) for g in obj.get("gamma_history", [])], matrix, weights)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "T", "u_sup", "u_norm_sq", "phi_lo", "phi_hi"])
        for r, rec in enumerate(self.records):
            lo, hi = rec.phi.enclosure(96)
            w.writerow([r, str(rec.T), rec.u.sup_norm, rec.u.norm_sq,
                        fmt_decimal(lo, 20), fmt_decimal(hi, 20, up=True)])
        return buf.getvalue()


def audit_sequence(seq: ApproxSequence, L: FormsMatrix, k: WeightVector) -> AuditReport:
    """Re-verify the box inequalities satisfied by every record, exactly."""
    g = _sc(seq.gamma)
    m = k.m
    top = k.top
    e1 = k.exponent(top)
    R = seq.R
    entries: list[AuditEntry] = []

    def add(r, name, ok, big, small):
        lo, hi = _margin(big, small)
        entries.append(AuditEntry(r, name, bool(ok), lo, hi))

    for r, rec in enumerate(seq.records):
        T, u = rec.T, rec.u
        phi = dual_error(L, u)
        u1 = abs(u[top])
        # |u_1| <= gamma^-m T^(m k_1)
        rhs = PowScalar(T, e1, 1 / g ** m)
        add(r, "useful1_u1", rhs.cmp(u1) >= 0, rhs, u1)
        for j in range(L.n):
            if j == top:
                continue
            rhs = _pow(T, k.exponent(j))
            add(r, f"useful1_u{j + 1}", rhs.cmp(abs(u[j])) >= 0, rhs, abs(u[j]))
        bound = g / T
        add(r, "useful2", phi <= bound, bound, phi)
        t1 = _pow(T, e1)
        add(r, "useful3a", t1.cmp(u1) < 0, u1, t1)
        wn = weighted_norm(u, k)
        own = PowScalar(u1, 1 / e1, 1)
        entries.append(AuditEntry(r, "useful3a_norm", wn.cmp(own) == 0, "0", "0"))
        # phi >= gamma |u_1|^(-1/(m k_1))   <=>   phi |u_1|^(1/(m k_1)) >= gamma
        lhs = PowScalar(u1, 1 / e1, phi)
        add(r, "useful3_dual", lhs.cmp(g) >= 0, lhs, g)
        low = PowScalar(seq.gamma, 1 + 1 / k.k1, Scalar(1) / T)
        add(r, "useful3", low.cmp(phi) <= 0, phi, low)
        T_next = T * R
        up4 = g * R / T_next
        add(r, "useful4", phi <= up4, up4, phi)
        if rec.phi != phi:
            entries.append(AuditEntry(r, "phi_recorded", False, "0", "0"))
        if r + 1 < len(seq.records):
            nxt = dual_error(L, seq.records[r + 1].u)
            add(r, "phi_decreasing", nxt < phi, phi, nxt)
        if r > 0 and seq.records[r - 1].T * R != T:
            entries.append(AuditEntry(r, "T_geometric", False, "0", "0"))
    return AuditReport(entries)


def generate_sequence(L: FormsMatrix, k: WeightVector, gamma, r_max: int,
                      tie_break: str = "phi-first", strict: bool = True,
                      budget: PrecisionBudget = PrecisionBudget(),
                      allow_surrogate: bool = False) -> ApproxSequence:
    """Records z(T_r) for ``T_r = R**r``, ``r = 0..r_max``, with audit.

    ``gamma`` is re-validated at every ``T_r``: a point of the small box, or a
    z(T) whose dual quantity falls below gamma, shrinks it just below that
    quantity and the run restarts.
    """
    if k.n != L.n or k.m != L.m:
        raise DimensionError("weights do not match the matrix")
    require_full_rank(L, allow_surrogate)
    gamma = as_fraction(gamma)
    history = [gamma]
    while True:
        R = compute_R(gamma, k)
        records = []
        restart = False
        for r in range(r_max + 1):
            T = Fraction(R) ** r
            budget.check_horizon(L, int_bound(1 / Fraction(gamma) ** k.m, T, k.exponent(k.top)))
            chk = check_gamma_empty(L, k, gamma, T)
            if chk is not True:
                val = weighted_norm(chk.u, k).times(dual_error(L, chk.u))
                lo, _ = val.enclosure(128)
                gamma = min(lo * GAMMA_SHRINK, gamma * GAMMA_SHRINK)
                history.append(gamma)
                restart = True
                break
            rec = best_approx(L, k, gamma, T, tie_break)
            val = weighted_norm(rec.u, k).times(rec.phi)
            if val.cmp(gamma) < 0:
                # z(T) itself shows gamma overshoots the dual constant
                lo, _ = val.enclosure(128)
                gamma = lo * GAMMA_SHRINK
                history.append(gamma)
                restart = True
                break
            records.append(rec)
        if not restart:
            break
    seq = ApproxSequence(gamma, R, records, None, history, L, k)
    seq.audit = audit_sequence(seq, L, k)
    if strict and not seq.audit.passed:
        f = seq.audit.failures[0]
        raise AuditFailure(f.name, f.r)
    return seq
