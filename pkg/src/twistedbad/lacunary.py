"""Lacunary partitions of best-approximation sequences and lacunarity audits."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .core import IntVector, WeightVector, weighted_norm
from .scalar import PowScalar, as_fraction, fmt_decimal, rpow_bounds

EUCLIDEAN = "euclidean"
WEIGHTED = "weighted"


@dataclass
class LacunarityReport:
    norm: str
    M: Fraction
    min_ratio: tuple[Fraction, Fraction] | None
    violation: int | None
    margins: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.violation is None

    def to_json(self):
        out = {"norm": self.norm, "M": str(self.M), "passed": self.passed,
               "violation": self.violation, "margins": list(self.margins)}
        if self.min_ratio is not None:
            out["min_ratio_lo"] = fmt_decimal(self.min_ratio[0], 15)
            out["min_ratio_hi"] = fmt_decimal(self.min_ratio[1], 15, up=True)
        return out


def lacunarity_audit(seq: Sequence[Sequence[int]], M=2, norm: str = EUCLIDEAN,
                     k: WeightVector | None = None) -> LacunarityReport:
    """Check ``|w_{r+1}| >= M |w_r|`` for consecutive pairs, exactly.

    Euclidean comparisons use squared norms; the weighted norm
    ``max_j |x_j|^(1/(m k_j))`` is compared by exponent clearing.
    """
    M = as_fraction(M)
    if norm not in (EUCLIDEAN, WEIGHTED):
        raise ValueError(f"unknown norm {norm!r}")
    if norm == WEIGHTED and k is None:
        raise ValueError("weighted lacunarity needs the weight vector (with m)")
    vecs = [IntVector(w) for w in seq]
    if any(w.is_zero() for w in vecs):
        raise ValueError("lacunarity is defined for nonzero vectors")
    violation = None
    margins: list[str] = []
    best: tuple[Fraction, Fraction] | None = None
    for r in range(len(vecs) - 1):
        a, b = vecs[r], vecs[r + 1]
        if norm == EUCLIDEAN:
            margin = b.norm_sq - M * M * a.norm_sq
            ok = margin >= 0
            margins.append(str(margin))
            ratio = rpow_bounds(Fraction(b.norm_sq, a.norm_sq), Fraction(1, 2), 64)
        else:
            na, nb = weighted_norm(a, k), weighted_norm(b, k)
            ok = nb.cmp(na.times(M)) >= 0
            alo, ahi = na.enclosure(96)
            blo, bhi = nb.enclosure(96)
            margins.append(fmt_decimal(blo - M * ahi, 15))
            ratio = (blo / ahi, bhi / alo)
        if not ok and violation is None:
            violation = r
        if best is None or ratio[0] < best[0]:
            best = ratio
    return LacunarityReport(norm, M, best, violation, margins)


def compute_stride(R: int, m: int, k, n: int, gamma) -> int:
    """Least ``t >= 1`` with ``R^(t m k_1) >= 2 sqrt(n) gamma^-m``.

    Squared and raised to the denominator of ``k_1 = p/q`` this reads
    ``R^(2 t m p) >= (4 n gamma^(-2m))^q``, an integer/rational comparison.
    """
    if R < 2:
        raise ValueError("R must be >= 2")
    gamma = as_fraction(gamma)
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    k1 = k.k1 if isinstance(k, WeightVector) else as_fraction(k)
    p, q = k1.numerator, k1.denominator
    rhs = (4 * n / gamma ** (2 * m)) ** q
    t = 1
    while Fraction(R) ** (2 * t * m * p) < rhs:
        t += 1
    return t


@dataclass
class PartitionSpec:
    t: int
    classes: list[list[IntVector]]
    indices: list[list[int]]

    def to_json(self):
        return {"t": self.t, "indices": self.indices,
                "classes": [[list(w) for w in cls] for cls in self.classes]}


def partition_sequence(seq: Sequence[Sequence[int]], t: int) -> PartitionSpec:
    """Split by index residue mod ``t``, preserving order."""
    if t < 1:
        raise ValueError("stride must be >= 1")
    idx = [list(range(t0, len(seq), t)) for t0 in range(t)]
    classes = [[IntVector(seq[i]) for i in ix] for ix in idx]
    return PartitionSpec(t, classes, idx)


@dataclass
class GrowthReport:
    rows: list[dict]

    @property
    def passed(self) -> bool:
        return all(r["lower_ok"] and r["upper_ok"] for r in self.rows)

    def to_json(self):
        return {"passed": self.passed, "rows": self.rows}


def verify_growth_bounds(records, k: WeightVector, gamma) -> GrowthReport:
    """``T_r^(2 m k_1) < |u_r|_e^2 <= gamma^(-2m) n T_r^(2 m k_1)`` for every record."""
    gamma = as_fraction(gamma)
    m, n = k.m, k.n
    e = 2 * m * k.k1
    upper_coeff = Fraction(n) / gamma ** (2 * m)
    rows = []
    for r, rec in enumerate(records):
        T = as_fraction(rec.T)
        nsq = rec.u.norm_sq
        low = PowScalar(T, e, 1)
        high = PowScalar(T, e, upper_coeff)
        llo, lhi = low.enclosure(64)
        hlo, hhi = high.enclosure(64)
        rows.append({
            "r": r, "T": str(T), "norm_sq": nsq,
            "lower_ok": low.cmp(nsq) < 0,
            "upper_ok": high.cmp(nsq) >= 0,
            "lower_ratio": fmt_decimal(nsq / lhi, 12),
            "upper_ratio": fmt_decimal(hlo / nsq, 12),
        })
    return GrowthReport(rows)
