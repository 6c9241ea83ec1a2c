"""
Noiseless secret sharing round
==============================

Alice and Bob each apply a Pauli operation to their half of a shared
four-qubit GHZ state. Bob's choice also travels to Charlie as a 4-level
qudit through teleportation. Dennis measures his two qubits in the Bell
basis and announces the result, after which Charlie reads off Alice's
operation from a Bell measurement of his own.
"""

import numpy as np

from qsecret import protocol

# The sixteen operation pairs collapse onto eight states.
for e in protocol.LAMBDA_TABLE:
    print(e.index, e.op_pairs, [(round(c, 4), x, y) for c, x, y in e.bell_form])

# One round in detail: Alice uses X, Bob uses Z.
run = protocol.run_ideal("X", "Z")
print("lambda index:", run.lambda_index, " teleport success p:", run.teleport_probability)
for b in run.branches:
    print(f"  Dennis {b.outcome.bits} (p={b.probability:.3f}) -> Charlie sees {b.charlie_bell}, "
          f"decodes Alice={b.alice_decoded}, Bob={b.bob_decoded}")

# Teleportation works for any qudit state, not just basis vectors.
rng = np.random.default_rng(1)
chi = rng.normal(size=4) + 1j * rng.normal(size=4)
chi /= np.linalg.norm(chi)
out, p = protocol.teleport_qudit(chi)
print("teleported fidelity:", abs(np.vdot(chi, out)) ** 2, " p =", p)

tally = protocol.run_ideal_exhaustive()
print(f"{tally.pairs_decoded}/{tally.pairs_total} pairs decoded")
