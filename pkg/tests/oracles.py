"""Independent reference implementations used to freeze expected values.

Deliberately naive: plain loops, full enumeration, textbook formulas.
None of these share code paths with the package internals they check.
"""

from __future__ import annotations

import numpy as np

from taxokg.data import Direction, Triple


def naive_simple_score(eh, et, rf, rb, h, r, t, relu=False):
    """SimplE score from raw matrices, term by term."""
    def emb(row):
        return np.maximum(row, 0.0) if relu else row

    fwd = sum(emb(eh[h])[l] * rf[r][l] * emb(et[t])[l] for l in range(len(rf[r])))
    bwd = sum(emb(eh[t])[l] * rb[r][l] * emb(et[h])[l] for l in range(len(rb[r])))
    return 0.5 * (fwd + bwd)


def naive_complex_score(eh, et, rf, rb, h, r, t):
    """ComplEx score via actual complex arithmetic."""
    hv = eh[h] + 1j * et[h]
    rv = rf[r] + 1j * rb[r]
    tv = eh[t] + 1j * et[t]
    return float(np.real(np.sum(hv * rv * np.conj(tv))))


def rank_by_sort(scores, true_entity, excluded=()):
    """Rank of the true entity: full sort, strictly-greater counting."""
    s0 = scores[true_entity]
    pool = [s for e, s in enumerate(scores) if e != true_entity and e not in set(excluded)]
    return 1 + sum(1 for s in sorted(pool, reverse=True) if s > s0)


def mrr_and_hits(rank_pairs, hits_at=(1, 3, 10)):
    """Metrics from (head_rank, tail_rank) pairs, straight from the formulas."""
    ranks = [r for pair in rank_pairs for r in pair]
    mrr = sum(1.0 / r for r in ranks) / len(ranks)
    hits = {k: sum(1 for r in ranks if r <= k) / len(ranks) for k in hits_at}
    return mrr, hits


def closure_by_repeated_scan(triples, rules):
    """Fixpoint by rescanning everything until no rule adds a triple."""
    derived = set(triples)
    changed = True
    while changed:
        changed = False
        for h, r, t in list(derived):
            for rule in rules:
                if rule.premise != r:
                    continue
                if rule.direction is Direction.DIRECT:
                    new = Triple(h, rule.conclusion, t)
                else:
                    new = Triple(t, rule.conclusion, h)
                if new not in derived:
                    derived.add(new)
                    changed = True
    return derived


def central_difference(fn, array, i, j, step=1e-5):
    """Central finite difference of fn() in array[i, j]."""
    orig = array[i, j]
    array[i, j] = orig + step
    up = fn()
    array[i, j] = orig - step
    down = fn()
    array[i, j] = orig
    return (up - down) / (2.0 * step)
