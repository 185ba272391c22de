"""Ranking metrics: raw vs filtered, tie handling, per-triple ranks.

A test triple is ranked against every head corruption and every tail
corruption. Filtered mode drops corruptions that are themselves known
facts, which is why it never hurts the rank. The metrics only depend on
score order, so any monotone transformation (sigmoid included) leaves
them unchanged.
"""

import numpy as np

from taxokg import ModelKind, Triple, evaluate, init_params, rank_triple
from taxokg.evaluation import format_report_table

rng = np.random.default_rng(0)
n = 12
model = init_params(ModelKind.SIMPLE, n, 2, 6, seed=4)

known = sorted({
    Triple(int(h), int(r), int(t))
    for h, r, t in zip(rng.integers(0, n, 40), rng.integers(0, 2, 40),
                       rng.integers(0, n, 40))
})
test = known[:10]

report = evaluate(model, test, known)
print(format_report_table(report))

triple = test[0]
for side in ("head", "tail"):
    raw = rank_triple(model, triple, side, filtered=False, known=known)
    filt = rank_triple(model, triple, side, filtered=True, known=known)
    print(f"{triple} {side}-corruption rank: raw {raw:.0f}, filtered {filt:.0f}")

# tie handling: the optimistic rank counts only strictly-better
# candidates; the expected mode averages in half of the exact ties
flat = init_params(ModelKind.SIMPLE, n, 2, 6, seed=5)
flat.relation_fwd[:] = 0.0
flat.relation_bwd[:] = 0.0  # every score is now exactly zero
t = test[0]
print("\nall-tied scores:")
print("  optimistic rank:", rank_triple(flat, t, "head", False, known))
print("  expected rank:  ", rank_triple(flat, t, "head", False, known,
                                        tie_mode="expected"))
