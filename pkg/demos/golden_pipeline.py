"""
From a matrix to a certified badly approximable shift
=====================================================

Walks the whole pipeline for the golden ratio: the dual constant gamma, the
best-approximation vectors z(T_r), the lacunary split, one game, and the final
check that the game's point has a positive twisted constant.
"""
from fractions import Fraction

from twistedbad import catalog
from twistedbad.badness import end_to_end_check
from twistedbad.core import WeightVector
from twistedbad.game import GameConfig, play
from twistedbad.lacunary import compute_stride, lacunarity_audit, partition_sequence
from twistedbad.minkowski import estimate_gamma, generate_sequence
from twistedbad.scalar import fmt_decimal

L = catalog.get("golden")
k = WeightVector.uniform(1, 1)

# the dual constant at a finite horizon; for the golden ratio it is (3 - sqrt5)/2
est = estimate_gamma(L, k, 1000)
print("gamma_1000 =", est.value.exact(), "witness u =", list(est.witness))

# a rational gamma below that value drives the sequence; 25/66 keeps R = 4
seq = generate_sequence(L, k, Fraction(25, 66), 12)
print("R =", seq.R, "u_r =", [r.u[0] for r in seq.records])
print("all growth and box audits pass:", seq.audit.passed)

# every t-th vector forms a 2-lacunary class
t = compute_stride(seq.R, 1, k, 1, seq.gamma)
part = partition_sequence(seq.u_vectors, t)
print("stride", t, "classes lacunary:", [lacunarity_audit(c, 2).passed for c in part.classes])

# White pushes the ball away from every hyperplane u_r . x in Z
config = GameConfig(part.classes, Fraction(1, 2))
tr = play(config, black="hug", rounds=60, seed=7)
alpha_hat = list(tr.final_ball.center)
print("certified margin epsilon ~", fmt_decimal(tr.certified_epsilon(), 12))

# the twisted constant of alpha_hat beats the predicted kappa at Q = 10^4
rep = end_to_end_check(L, k, seq.gamma, seq.R, alpha_hat, tr.certified_epsilon(), 10 ** 4)
print(rep["verdict"], "c_Q ~", rep["c_Q"]["lo"][:12], "kappa ~", rep["kappa"]["kappa_decimal"][:14])
