import json
import random
from fractions import Fraction as F

import pytest

import oracle
from twistedbad.core import FormsMatrix, IntVector, WeightVector
from twistedbad.errors import AuditFailure, BoxTooLarge, DegenerateRank
from twistedbad.minkowski import (
    ApproxSequence,
    BestApproxRecord,
    BoxParams,
    audit_sequence,
    best_approx,
    box_membership,
    box_volume,
    check_gamma_empty,
    compute_R,
    enumerate_box,
    estimate_gamma,
    generate_sequence,
)
from twistedbad.scalar import Scalar

PHI = (Scalar(1) + Scalar.sqrt(5)) / 2
GOLDEN = FormsMatrix([[PHI]])
SQRT2 = FormsMatrix([[Scalar.sqrt(2)]])
K1 = WeightVector.uniform(1, 1)
G = F(25, 66)


def random_weights(rng, n, m):
    raw = [rng.randint(1, 5) for _ in range(n)]
    return WeightVector(m, tuple(F(r, sum(raw)) for r in raw))


def test_volume_identity_random_configs():
    rng = random.Random(1)
    for _ in range(50):
        n, m = rng.randint(1, 3), rng.randint(1, 2)
        k = random_weights(rng, n, m)
        gamma = F(rng.randint(1, 99), 100)
        T = F(rng.randint(1, 10 ** 6), rng.randint(1, 1000)) + 1
        vol = box_volume(k, BoxParams.standard(k, gamma, T, large=True))
        assert vol == 2 ** (n + m)


def test_box_membership_examples():
    params = BoxParams(1, (1 / G, G))
    assert box_membership([0], [0], GOLDEN, K1, params)
    assert box_membership([2], [3], GOLDEN, K1, params)
    assert not box_membership([3], [5], GOLDEN, K1, params)
    # closed boundary: both constraints tight
    third = FormsMatrix([[F(1, 3)]])
    assert box_membership([2], [1], third, K1, BoxParams(1, (F(2), F(1, 3))))
    assert not box_membership([2], [1], third, K1, BoxParams(1, (F(2), F(1, 4))))


def test_enumerate_box_examples():
    assert enumerate_box(GOLDEN, K1, BoxParams(1, (F(66, 25), F(25, 66)))) == [
        (IntVector([2]), IntVector([3]))]
    assert enumerate_box(GOLDEN, K1, BoxParams(1, (F(1, 2), F(1, 3)))) == []
    with pytest.raises(BoxTooLarge):
        enumerate_box(GOLDEN, K1, BoxParams(10 ** 6, (F(1), F(1, 2))), limit=1000)


def test_enumerate_box_matches_brute_force_2x1():
    L = FormsMatrix([[Scalar.sqrt(3)], [Scalar(F(1, 7), 2, 3)]])
    k = WeightVector(1, (F(2, 3), F(1, 3)))
    params = BoxParams(20, (F(3, 2), F(2), F(1)))
    got = enumerate_box(L, k, params)
    want = []
    for u1 in range(0, 20):
        for u2 in range(-20, 21):
            if (u1, u2) == (0, 0) or (u1 == 0 and u2 < 0):
                continue
            v = [round(oracle.mpf(x)) for x in [u1 * L.entry(0, 0) + u2 * L.entry(1, 0)]]
            if box_membership([u1, u2], v, L, k, params):
                want.append((IntVector([u1, u2]), IntVector(v)))
    want += [(IntVector([0, 0]), IntVector([v])) for v in range(1, 1)]
    assert got == sorted(want)


def test_check_gamma_empty_examples():
    assert check_gamma_empty(GOLDEN, K1, G, 4) is True
    cx = check_gamma_empty(GOLDEN, K1, (Scalar(3) - Scalar.sqrt(5)) / 2, 1)
    assert not cx
    assert (cx.u, cx.v) == (IntVector([1]), IntVector([2]))
    assert check_gamma_empty(GOLDEN, K1, F(1, 10 ** 6), 100) is True


def test_best_approx_example_and_oracle():
    rec = best_approx(GOLDEN, K1, G, 4)
    assert (rec.u, rec.v) == (IntVector([8]), IntVector([13]))
    assert rec.phi == Scalar(9, -4, 5)
    assert rec.phi >= G / 8
    for T in (1, 4, 16, 64, 256, 1024):
        want = oracle.annulus_best(GOLDEN, K1, G, T, int(T / G) + 1)
        assert best_approx(GOLDEN, K1, G, T).u == IntVector([want[1]])


def test_best_approx_is_deterministic():
    a = best_approx(SQRT2, K1, F(1, 3), 27)
    b = best_approx(SQRT2, K1, F(1, 3), 27)
    assert a == b


def test_tie_break_variants():
    # annulus (4, 10.56]: u=5 has phi ~ 0.0902, u=8 has phi ~ 0.0557
    assert best_approx(GOLDEN, K1, G, 4).u == IntVector([8])
    rec = best_approx(GOLDEN, K1, G, 4, "u1-first")
    assert rec.u == IntVector([5])
    assert rec.phi == Scalar(F(-11, 2), F(5, 2), 5)


def test_estimate_gamma_golden_and_oracle():
    for U in (10, 100):
        est = estimate_gamma(GOLDEN, K1, U)
        assert est.value.exact() == (Scalar(3) - Scalar.sqrt(5)) / 2
        assert est.witness == IntVector([1])
        assert est.gamma_rat < est.lo
        val, wits = oracle.dual(GOLDEN, K1, U)
        assert [w for w in wits if w[0] > 0] == [(1,)]
        assert oracle.mpf(est.lo) <= val <= oracle.mpf(est.hi)


def test_estimate_gamma_sqrt2_corrected_value():
    # the minimum up to U=50 sits at u=2 with 2*||2 sqrt2|| = 6 - 4 sqrt2, below sqrt2 - 1
    est = estimate_gamma(SQRT2, K1, 50)
    assert est.witness == IntVector([2])
    assert est.value.exact() == Scalar(6, -4, 2)
    val, wits = oracle.dual(SQRT2, K1, 50)
    assert [w for w in wits if w[0] > 0] == [(2,)]
    assert abs(val - oracle.mpf(est.value.exact())) < oracle.TOL


def test_estimate_gamma_monotone_and_degenerate():
    vals = [estimate_gamma(SQRT2, K1, U).value for U in (5, 10, 20, 40, 80)]
    assert all(b.cmp(a) <= 0 for a, b in zip(vals, vals[1:]))
    with pytest.raises(DegenerateRank):
        estimate_gamma(FormsMatrix([[F(1, 2)]]), K1, 10)


def test_compute_R():
    assert compute_R(G, K1) == 4
    k = WeightVector(1, (F(1, 2), F(1, 2)))
    # gamma^-2 = 4 exactly -> ceil 4, R 5
    assert compute_R(F(1, 2), k) == 5


def test_golden_sequence():
    seq = generate_sequence(GOLDEN, K1, G, 8)
    assert seq.R == 4
    assert [r.u[0] for r in seq.records] == [2, 8, 34, 144, 610, 2584, 6765, 28657, 121393]
    assert seq.audit.passed
    phis = [r.phi for r in seq.records]
    assert all(b < a for a, b in zip(phis, phis[1:]))
    # useful4: phi_r <= gamma R / T_{r+1}
    for r, rec in enumerate(seq.records):
        assert rec.phi <= G * seq.R / F(seq.R) ** (r + 1)


def test_sqrt2_sequence():
    seq = generate_sequence(SQRT2, K1, F(1, 3), 8)
    assert seq.audit.passed
    assert len(seq.records) == 9


def test_r_max_zero():
    seq = generate_sequence(GOLDEN, K1, G, 0)
    assert len(seq.records) == 1 and seq.records[0].T == 1


def test_gamma_shrinks_on_counterexample():
    seq = generate_sequence(GOLDEN, K1, F(2, 5), 3)
    assert seq.gamma < (Scalar(3) - Scalar.sqrt(5)) / 2
    assert seq.gamma_history[0] == F(2, 5)
    assert seq.audit.passed


def test_audit_flags_fake_record():
    seq = generate_sequence(GOLDEN, K1, G, 2)
    rec = seq.records[1]
    seq.records[1] = BestApproxRecord(rec.T, IntVector([3]), IntVector([5]), 5 - 3 * PHI)
    rep = audit_sequence(seq, GOLDEN, K1)
    assert not rep.passed
    assert "useful2" in {e.name for e in rep.failures}


def test_strict_audit_raises():
    seq = generate_sequence(GOLDEN, K1, G, 2)
    obj = seq.to_json()
    obj["records"][2]["u"] = [35]
    bad = ApproxSequence.from_json(obj)
    assert not audit_sequence(bad, GOLDEN, K1).passed


def test_json_and_csv_roundtrip():
    seq = generate_sequence(GOLDEN, K1, G, 4)
    obj = json.loads(json.dumps(seq.to_json()))
    back = ApproxSequence.from_json(obj)
    assert back.u_vectors == seq.u_vectors
    assert [r.phi for r in back.records] == [r.phi for r in seq.records]
    assert audit_sequence(back, GOLDEN, K1).passed
    assert obj["records"][1]["audit"]["useful2"]["ok"] is True
    lines = seq.to_csv().splitlines()
    assert lines[0] == "r,T,u_sup,u_norm_sq,phi_lo,phi_hi"
    assert lines[2].startswith("1,4,8,64,")


def _surrogate(rng, n, bits=64):
    return FormsMatrix([[F(rng.getrandbits(bits), 2 ** bits)] for _ in range(n)], surrogate_bits=bits)


@pytest.mark.parametrize("seed", range(20))
def test_random_surrogates_pass_audit(seed):
    rng = random.Random(seed)
    n = 1 if seed < 12 else 2
    L = _surrogate(rng, n)
    k = WeightVector.uniform(n, 1) if n == 1 else random_weights(rng, 2, 1)
    with pytest.raises(DegenerateRank):
        estimate_gamma(L, k, 10)
    est = estimate_gamma(L, k, 30 if n == 1 else 8, allow_surrogate=True)
    seq = generate_sequence(L, k, est.gamma_rat, 2 if n == 1 else 1, allow_surrogate=True)
    assert seq.audit.passed
    phis = [r.phi for r in seq.records]
    assert all(b < a for a, b in zip(phis, phis[1:]))


def test_audit_failure_exception_names_inequality():
    err = AuditFailure("useful2", 3)
    assert "useful2" in str(err) and err.r == 3
