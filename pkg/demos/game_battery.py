"""
The push-away strategy against many opponents
==============================================

Plays the golden-ratio game against a hundred random Black players plus the
hugging and centering strategies, and tabulates the certified margins.
"""
from fractions import Fraction

import numpy as np

from twistedbad import catalog
from twistedbad.core import WeightVector
from twistedbad.game import GameConfig, play, replay
from twistedbad.lacunary import compute_stride, partition_sequence
from twistedbad.minkowski import generate_sequence

L = catalog.get("golden")
k = WeightVector.uniform(1, 1)
seq = generate_sequence(L, k, Fraction(25, 66), 12)
t = compute_stride(seq.R, 1, k, 1, seq.gamma)
config = GameConfig(partition_sequence(seq.u_vectors, t).classes, Fraction(1, 2))

margins = []
for seed in range(1, 101):
    tr = play(config, black="random", rounds=60, seed=seed)
    # each transcript is re-validated move by move from its JSON lines
    assert replay(tr.to_jsonl().splitlines()).legal
    margins.append(float(tr.certified_epsilon()))
margins = np.array(margins)
print(f"random Black: {np.sum(margins > 0)}/100 positive, "
      f"min {margins.min():.3e}, median {np.median(margins):.3e}")

for black in ("hug", "center"):
    tr = play(config, black=black, rounds=60, seed=7)
    print(f"{black:>6}: epsilon ~ {float(tr.certified_epsilon()):.3e}")

# hugging the last hyperplane is the hardest opponent seen here
