"""
Primal and dual constants across the catalog
============================================

Doubling profiles of the homogeneous constant c_Q and the dual constant c*_U
for every catalog matrix. Bounded-away and decaying sides should pair up; a
mismatch would be flagged INCONSISTENT. This is a finite-horizon check, not a
proof.
"""
from twistedbad import catalog
from twistedbad.badness import transference_report
from twistedbad.core import WeightVector

for name in catalog.ids():
    L = catalog.get(name)
    k = WeightVector.uniform(L.n, L.m)
    H = 1024 if L.n == 1 else 200
    rep = transference_report(L, k, H, H)
    primal = ", ".join(f"{float(c['lo']):.3g}" for c in rep["homogeneous_profile"]["constants"])
    print(f"{name:<14} {rep['verdict']:<12} primal {rep['primal']['status']:<13} "
          f"dual {rep['dual']['status']:<13} c_Q: {primal}")
