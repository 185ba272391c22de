"""The three scoring functions and how delta-ties enforce subsumption.

SimplE scores a triple by averaging a forward and a backward multilinear
product; ComplEx takes the real part of a complex three-way product.
SimplE+ additionally forces entity embeddings non-negative, which makes
the score monotone in the relation vector, so tying

    premise = conclusion - relu(delta)

guarantees score(h, premise, t) <= score(h, conclusion, t) at every
parameter value. No training involved here: the inequality is structural.
"""

import numpy as np

from taxokg import (
    ModelKind,
    Triple,
    effective_relation,
    init_params,
    probability,
    score_complex,
    score_simple,
)
from taxokg.data import Direction, SubsumptionRule
from taxokg.models import score_batch
from taxokg.rng import substream

names = ["IsCapitalOf", "IsCityIn"]
rules = (SubsumptionRule(0, 1, Direction.DIRECT),)

plus = init_params(ModelKind.SIMPLE_PLUS, n_entities=6, n_relations=2, dim=8,
                   rules=rules, relation_names=names, seed=0)

# crank the raw delta to something large and random: the guarantee must
# hold regardless
rng = substream(1, "demo")
plus.delta_fwd[:] = rng.normal(0, 2, plus.delta_fwd.shape)
plus.delta_bwd[:] = rng.normal(0, 2, plus.delta_bwd.shape)

heads = rng.integers(0, 6, size=500)
tails = rng.integers(0, 6, size=500)
premise_scores = score_batch(plus, heads, np.zeros(500, dtype=int), tails)
conclusion_scores = score_batch(plus, heads, np.ones(500, dtype=int), tails)
print("500 random pairs, worst (conclusion - premise):",
      float(np.min(conclusion_scores - premise_scores)), "(never negative)")

fwd_p, _ = effective_relation(plus, 0)
fwd_c, _ = effective_relation(plus, 1)
print("effective premise <= effective conclusion element-wise:",
      bool(np.all(fwd_p <= fwd_c)))
print()

# Plain SimplE and ComplEx cannot give this guarantee: negating an entity
# embedding flips every probability it participates in.
simple = init_params(ModelKind.SIMPLE, 6, 2, 8, seed=2)
t = Triple(0, 0, 1)
before = probability(simple, t)
simple.entity_head[0] *= -1
simple.entity_tail[0] *= -1
after = probability(simple, t)
print(f"SimplE: negate head entity, probability {before:.3f} -> {after:.3f} "
      f"(sums to {before + after:.3f})")

cx = init_params(ModelKind.COMPLEX, 6, 2, 8, seed=3)
print("ComplEx score of (0, r0, 1):", round(score_complex(cx, Triple(0, 0, 1)), 4))
cx.relation_bwd[0] = 0.0  # zero imaginary part makes a relation symmetric
print("with Im(r0) = 0, score(0, r0, 1) == score(1, r0, 0):",
      np.isclose(score_complex(cx, Triple(0, 0, 1)), score_complex(cx, Triple(1, 0, 0))))
print("SimplE+ score of the same triple:", round(score_simple(plus, Triple(0, 0, 1)), 4))
