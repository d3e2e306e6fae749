"""
Constructed shifts against generic shifts
=========================================

Twisted constants c_Q(alpha) at Q = 10^4 for the game's point and for random
rational alpha. Almost every alpha fails to be badly approximable, yet at a
finite horizon the gap is only a factor of a few: the constant of a random
alpha has not yet decayed by 10^4.
"""
import random
from fractions import Fraction

import numpy as np

from twistedbad import catalog
from twistedbad.badness import twisted_constant
from twistedbad.core import WeightVector
from twistedbad.game import GameConfig, play
from twistedbad.lacunary import compute_stride, partition_sequence
from twistedbad.minkowski import generate_sequence

Q = 10 ** 4
L = catalog.get("golden")
k = WeightVector.uniform(1, 1)
seq = generate_sequence(L, k, Fraction(25, 66), 12)
t = compute_stride(seq.R, 1, k, 1, seq.gamma)
config = GameConfig(partition_sequence(seq.u_vectors, t).classes, Fraction(1, 2))
alpha_hat = list(play(config, black="hug", rounds=60, seed=7).final_ball.center)
hat = float(twisted_constant(L, k, alpha_hat, Q))

rng = random.Random(2024)
vals = np.array([float(twisted_constant(L, k, [Fraction(rng.randrange(10 ** 9), 10 ** 9)], Q))
                 for _ in range(100)])
print(f"c_Q(alpha_hat)   ~ {hat:.5f}")
print(f"median c_Q(alpha) ~ {np.median(vals):.5f}, {np.sum(vals < hat)}/100 below alpha_hat")

# the largest constant any shift outside Z + Z phi reaches is at alpha = 1/2
half = float(twisted_constant(L, k, [Fraction(1, 2)], Q))
print(f"c_Q(1/2)          ~ {half:.5f}  (ten times the median needs more than this)")
