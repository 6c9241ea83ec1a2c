"""
Auditing the listed closed forms
================================

Every closed form the package carries is compared with a direct numerical
computation. Agreement is reported per section; disagreements are listed
with the gamma values where they occur.
"""

from qsecret import discrepancy_report

ledger = discrepancy_report([0.0, 0.25, 0.5, 0.75, 1.0])
for section, (passed, flagged) in ledger.summary().items():
    print(f"{section:12s} {passed:3d} pass {flagged:3d} flagged")

print()
for r in ledger.rows:
    if r.flagged and r.section in ("er1", "er2", "zeta"):
        print(f"{r.section:5s} gamma={r.gamma:<5} {r.quantity:24s} numeric {r.numeric:.4f}  listed {r.reference:.4f}")
print("feasible parameter sets:", ledger.feasible_sets)
