"""
Telling damped states apart
===========================

After Dennis announces his outcome, Charlie holds one of four damped states,
split into two classes by a projective measurement. Within each class he
uses a two-outcome-per-state POVM from a one-parameter family. This script
scans the families for positivity, looks at the error rates and searches
for the best measurement angle.
"""

import math

import numpy as np

from qsecret import discrimination as disc

bell = disc.GenMeasurement.bell()
ens = disc.build_ensemble(0.4, bell, "M1")
for m in ens.members:
    print(f"label {m.label}: weight {m.weight:.4f}")
print("inconclusive bound:", disc.inconclusive_bound(ens).value)

# Only the endpoint of each family is a valid measurement.
for row in disc.psd_scan(disc.U_FAMILY, [0.0, 0.05, 0.5]):
    print(f"u={row.value:<5} feasible={row.feasible}  min eigs {[round(x, 3) for x in row.min_eigs.values()]}")

print("\n gamma  er1     er2     T_bits  (listed closed forms)")
for g in np.linspace(0, 1, 5):
    r = disc.evaluate(g, 0.0, 0.0)
    print(f" {g:.2f}  {r.er1_numeric:.4f}  {r.er2_numeric:.4f}  {r.t_bits_numeric:.4f}"
          f"  ({r.er1_paper:.4f}, {r.er2_paper:.4f}, {r.t_bits_paper:.4f})")

# Bell parameters are best without noise; damping pulls the optimum towards |00>.
for g in (0.0, 0.3, 0.7):
    best = disc.optimize(g, [0.0], [0.0], disc.default_alpha_grid())
    print(f"gamma={g}: best alpha {best.alpha:.4f} (1/sqrt2 = {1 / math.sqrt(2):.4f}),"
          f" er1+er2 = {best.er1_numeric + best.er2_numeric:.4f}")
