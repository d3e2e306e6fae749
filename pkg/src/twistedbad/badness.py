"""Finite-horizon badness constants, the transference check, and kappa.

The three constants share one shape, a minimum over a finite integer box of a
maximum of terms ``base**e * ||.||``; every candidate that survives the float
pre-filter is re-decided exactly, so witnesses and values are certified.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _scan
from .core import (
    FormsMatrix,
    IntVector,
    PrecisionBudget,
    WeightVector,
    dual_error,
    eval_primal_forms,
    weighted_norm,
)
from .errors import DimensionError
from .scalar import PowScalar, Scalar, as_fraction, fmt_decimal, nearest_int_dist, rpow_bounds

PRIMAL = "primal"
DUAL = "dual"
TWISTED = "twisted"

DISCLAIMER = ("finite-horizon consistency check only; "
              "it does not prove membership in either set")


@dataclass
class Constant:
    """Minimum found over a horizon, exact and as an enclosure."""

    value: PowScalar
    witness: IntVector
    horizon: int
    bits: int = 128

    @property
    def enclosure(self) -> tuple[Fraction, Fraction]:
        return self.value.enclosure(self.bits)

    @property
    def lo(self) -> Fraction:
        return self.enclosure[0]

    @property
    def hi(self) -> Fraction:
        return self.enclosure[1]

    def is_zero(self) -> bool:
        return self.value.is_zero()

    def __float__(self):
        return float(self.value)

    def to_json(self):
        lo, hi = self.enclosure
        return {"horizon": self.horizon, "witness": list(self.witness),
                "lo": fmt_decimal(lo, 20), "hi": fmt_decimal(hi, 20, up=True),
                "exact": self.value.to_json()}


def _prefer(q: Sequence[int]):
    # among equal values: canonical sign first, then lexicographic
    return (not IntVector(q).is_canonical(), tuple(q))


def _minimize(ranges, canonical, float_fn, exact_fn, limit) -> tuple[PowScalar, IntVector]:
    cands, _ = _scan.scan_min(float_fn, ranges, canonical=canonical, limit=limit)
    best = None
    for q in sorted(cands, key=_prefer):
        val = exact_fn(q)
        if best is None or val.cmp(best[0]) < 0:
            best = (val, IntVector(q))
            if val.is_zero():
                break
    return best


def _alpha(alpha, n) -> list[Scalar] | None:
    if alpha is None:
        return None
    alpha = [Scalar.coerce(a) for a in alpha]
    if len(alpha) != n:
        raise DimensionError(f"alpha has {len(alpha)} coordinates, expected {n}")
    if all(not a for a in alpha):
        return None
    return alpha


def twisted_value(L: FormsMatrix, k: WeightVector, alpha, q: Sequence[int]) -> PowScalar:
    """``max_j |q|_inf^(m k_j) ||L_j(q) - alpha_j||`` exactly."""
    sup = max(abs(x) for x in q)
    vals = eval_primal_forms(L, q)
    best = None
    for j, x in enumerate(vals):
        if alpha is not None:
            x = x - alpha[j]
        v = PowScalar(sup, k.exponent(j), nearest_int_dist(x))
        if best is None or v.cmp(best) > 0:
            best = v
    return best


def twisted_constant(L: FormsMatrix, k: WeightVector, alpha, Q: int,
                     budget: PrecisionBudget = PrecisionBudget(),
                     limit: int = _scan.DEFAULT_LIMIT) -> Constant:
    """``min_{0 < |q| <= Q} max_j |q|^(m k_j) ||L_j(q) - alpha_j||`` with witness."""
    if k.n != L.n or k.m != L.m:
        raise DimensionError("weights do not match the matrix")
    if Q < 1:
        raise ValueError("horizon must be >= 1")
    budget.check_horizon(L, Q)
    al = _alpha(alpha, L.n)
    ff = _scan.FloatForms(L)
    expo = np.array([float(k.exponent(j)) for j in range(L.n)])

    def float_fn(Qv):
        sup = np.max(np.abs(Qv), axis=1).astype(np.float64)
        scale = sup[:, None] ** expo[None, :]
        d = ff.primal_dist(Qv, al)
        vals = d * scale
        return vals.max(axis=1), scale.max(axis=1) * _scan.ERR

    if al is None:
        ranges = [(0, Q)] + [(-Q, Q)] * (L.m - 1)
        canonical = True
    else:
        ranges = [(-Q, Q)] * L.m
        canonical = False
    value, witness = _minimize(ranges, canonical, float_fn,
                               lambda q: twisted_value(L, k, al, q), limit)
    return Constant(value, witness, Q, budget.bits)


def homogeneous_constant(L: FormsMatrix, k: WeightVector, Q: int,
                         budget: PrecisionBudget = PrecisionBudget(),
                         limit: int = _scan.DEFAULT_LIMIT) -> Constant:
    """The twisted constant at ``alpha = 0``."""
    return twisted_constant(L, k, None, Q, budget, limit)


def dual_constant(L: FormsMatrix, k: WeightVector, U: int,
                  budget: PrecisionBudget = PrecisionBudget(),
                  limit: int = _scan.DEFAULT_LIMIT) -> Constant:
    """``min_{0 < |u| <= U} (max_j |u_j|^(1/(m k_j))) max_i ||M_i(u)||`` with witness.

    The exponent is applied to the coordinates ``u_j`` of the dual vector.
    """
    if k.n != L.n or k.m != L.m:
        raise DimensionError("weights do not match the matrix")
    if U < 1:
        raise ValueError("horizon must be >= 1")
    budget.check_horizon(L, U)
    ff = _scan.FloatForms(L)
    inv = np.array([1.0 / float(k.exponent(j)) for j in range(L.n)])

    def float_fn(Uv):
        w = (np.abs(Uv).astype(np.float64) ** inv[None, :]).max(axis=1)
        return w * ff.dual_dist(Uv), w * _scan.ERR

    def exact_fn(u):
        return weighted_norm(u, k).times(dual_error(L, u))

    ranges = [(0, U)] + [(-U, U)] * (L.n - 1)
    value, witness = _minimize(ranges, True, float_fn, exact_fn, limit)
    return Constant(value, witness, U, budget.bits)


@dataclass
class BadnessProfile:
    variant: str
    horizons: list[int]
    constants: list[Constant]
    alpha: list | None = None

    def values(self) -> list[float]:
        return [float(c) for c in self.constants]

    def is_monotone(self) -> bool:
        return all(b.value.cmp(a.value) <= 0 for a, b in zip(self.constants, self.constants[1:]))

    def to_json(self):
        out = {"variant": self.variant, "horizons": self.horizons,
               "constants": [c.to_json() for c in self.constants]}
        if self.alpha is not None:
            out["alpha"] = [Scalar.coerce(a).to_json() for a in self.alpha]
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["Q", "c_lo", "c_hi", "witness"])
        for c in self.constants:
            lo, hi = c.enclosure
            w.writerow([c.horizon, fmt_decimal(lo, 20), fmt_decimal(hi, 20, up=True),
                        " ".join(str(x) for x in c.witness)])
        return buf.getvalue()


def doubling_horizons(H: int, doublings: int = 5) -> list[int]:
    hs = sorted({max(1, H >> s) for s in range(doublings + 1)})
    return hs


def profile(L: FormsMatrix, k: WeightVector, horizons: Sequence[int], variant: str,
            alpha=None, budget: PrecisionBudget = PrecisionBudget()) -> BadnessProfile:
    horizons = sorted(horizons)
    if variant == PRIMAL:
        cs = [homogeneous_constant(L, k, h, budget) for h in horizons]
    elif variant == DUAL:
        cs = [dual_constant(L, k, h, budget) for h in horizons]
    elif variant == TWISTED:
        cs = [twisted_constant(L, k, alpha, h, budget) for h in horizons]
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return BadnessProfile(variant, list(horizons), cs, list(alpha) if alpha is not None else None)


def classify_side(values: Sequence[float], window: int = 3, stable_factor: float = 2.0,
                  decay_factor: float = 8.0) -> tuple[str, float]:
    """``("bounded away" | "decaying", overall decay factor)`` for a profile.

    A side is bounded away when the last ``window`` doublings changed it by at
    most ``stable_factor`` and the whole profile by at most ``decay_factor``.
    """
    if not values or values[-1] <= 0:
        return "decaying", math.inf
    decay = values[0] / values[-1]
    ref = values[max(0, len(values) - 1 - window)]
    stable = ref <= stable_factor * values[-1] and decay <= decay_factor
    return ("bounded away" if stable else "decaying"), decay


def transference_verdict(primal: Sequence[float], dual: Sequence[float],
                         decay_factor: float = 8.0, window: int = 3,
                         stable_factor: float = 2.0) -> dict:
    ps, pd = classify_side(primal, window, stable_factor, decay_factor)
    ds, dd = classify_side(dual, window, stable_factor, decay_factor)
    bad = ((ps == "bounded away" and dd > decay_factor)
           or (ds == "bounded away" and pd > decay_factor))
    return {"verdict": "INCONSISTENT" if bad else "CONSISTENT",
            "primal": {"status": ps, "decay": "inf" if math.isinf(pd) else round(pd, 6)},
            "dual": {"status": ds, "decay": "inf" if math.isinf(dd) else round(dd, 6)},
            "note": DISCLAIMER}


def transference_report(L: FormsMatrix, k: WeightVector, Q: int, U: int,
                        doublings: int = 5, decay_factor: float = 8.0,
                        budget: PrecisionBudget = PrecisionBudget()) -> dict:
    """Homogeneous vs dual decay profiles across doubling horizons."""
    hp = profile(L, k, doubling_horizons(Q, doublings), PRIMAL, budget=budget)
    dp = profile(L, k, doubling_horizons(U, doublings), DUAL, budget=budget)
    out = transference_verdict(hp.values(), dp.values(), decay_factor)
    out["homogeneous_profile"] = hp.to_json()
    out["dual_profile"] = dp.to_json()
    return out


@dataclass(frozen=True)
class KappaInputs:
    eps: Fraction
    gamma: Fraction
    k: WeightVector
    R: int

    def __post_init__(self):
        for name in ("eps", "gamma"):
            v = as_fraction(getattr(self, name))
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1)")
            object.__setattr__(self, name, v)
        if self.R < 2:
            raise ValueError("R must be >= 2")

    @property
    def m(self) -> int:
        return self.k.m

    @property
    def n(self) -> int:
        return self.k.n


def _kappa_terms(inp: KappaInputs, uniform: bool, bits: int) -> list[tuple[Fraction, Fraction]]:
    """Enclosures of ``|q|^(m k_j) / (upper bound of |u_j(T_r)|)`` per coordinate j."""
    m, top, eps, g = inp.m, inp.k.top, inp.eps, inp.gamma
    e1 = inp.k.exponent(top)
    out = []
    for j in range(inp.n):
        e = e1 if uniform else inp.k.exponent(j)
        if j == top:
            # |u_1| <= gamma^-m (2 m gamma R |q| / eps)^(m k_1)
            a = rpow_bounds(eps / (2 * m * inp.R), e, bits)
            b = rpow_bounds(g, m * (1 - inp.k.k[top]), bits)
            out.append((a[0] * b[0], a[1] * b[1]))
        else:
            # |u_j| <= (2 m gamma R |q| / eps)^(m k_j)
            out.append(rpow_bounds(eps / (2 * m * inp.R * g), e, bits))
    return out


@dataclass
class KappaResult:
    kappa: Fraction
    per_j: list[Fraction]
    upper: Fraction

    def to_json(self):
        return {"kappa": str(self.kappa), "kappa_decimal": fmt_decimal(self.kappa, 15),
                "per_j": [fmt_decimal(x, 15) for x in self.per_j]}


def predict_kappa(inp: KappaInputs, bits: int = 96, uniform: bool = False) -> KappaResult:
    """Rational lower bound for the twisted constant forced by ``inf_r ||u_r . alpha|| >= eps``.

    For any ``q`` pick ``r`` with ``phi_r < eps/(2m|q|) <= phi_{r-1}``; then
    ``T_r <= 2 m gamma R |q| / eps`` and the box bounds on ``u(T_r)`` give
    ``max_j ||L_j(q) - alpha_j|| |q|^(m k_j) >= (eps/2n) min_j C_j`` with
    ``C_1 = (eps/(2mR))^(m k_1) gamma^(m(1-k_1))`` and
    ``C_j = (eps/(2mR gamma))^(m k_j)``.  ``uniform=True`` uses the exponent
    ``m k_1`` for every j, which is never larger.
    """
    terms = _kappa_terms(inp, uniform, bits)
    lead = inp.eps / (2 * inp.n)
    lows = [lead * lo for lo, _ in terms]
    return KappaResult(min(lows), lows, lead * min(hi for _, hi in terms))


def horizon_coverage(records, eps: Fraction, m: int, Q: int) -> dict:
    """Whether the records reach an r with ``phi_r < eps/(2 m Q)``."""
    thresh = Fraction(eps) / (2 * m * Q)
    for r, rec in enumerate(records):
        if rec.phi < thresh:
            return {"covered": True, "r_needed": r}
    return {"covered": False, "r_needed": None}


def end_to_end_check(L: FormsMatrix, k: WeightVector, gamma, R: int, alpha_hat, eps, Q: int,
                     records=None, budget: PrecisionBudget = PrecisionBudget()) -> dict:
    """PASS iff ``c_Q(alpha_hat) >= kappa(eps) > 0``, decided exactly."""
    eps = as_fraction(eps)
    c = twisted_constant(L, k, alpha_hat, Q, budget)
    if eps <= 0:
        kap = None
        passed = False
    else:
        kap = predict_kappa(KappaInputs(eps, as_fraction(gamma), k, R))
        passed = (not c.is_zero()) and c.value.cmp(kap.kappa) >= 0
    out = {"verdict": "PASS" if passed else "FAIL", "Q": Q,
           "c_Q": c.to_json(), "witness": list(c.witness),
           "epsilon": str(eps), "kappa": kap.to_json() if kap else None,
           "alpha_hat": [str(Scalar.coerce(a)) for a in alpha_hat]}
    if records is not None and eps > 0:
        out["horizon"] = horizon_coverage(records, eps, k.m, Q)
    return out
