"""Rule-based inference: forward closure, logical hit@1, redundancy stripping.

Rules have a single premise atom, so the closure of a set decomposes
into the union of the closures of its members; both the fixpoint and the
stripping scan exploit that. A derived triple carries one (source, rule)
witness, enough for diagnostics.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .data import Direction, SubsumptionRule, Triple


@dataclass(frozen=True)
class ClosureResult:
    derived: frozenset[Triple]
    provenance: dict[Triple, tuple[Triple, SubsumptionRule]]

    def __contains__(self, triple: Triple) -> bool:
        return triple in self.derived


def _apply_rule(triple: Triple, rule: SubsumptionRule) -> Triple:
    if rule.direction is Direction.DIRECT:
        return Triple(triple.head, rule.conclusion, triple.tail)
    return Triple(triple.tail, rule.conclusion, triple.head)


def forward_closure(
    triples: Iterable[Triple], rules: Sequence[SubsumptionRule]
) -> ClosureResult:
    """Least fixpoint of the input under the rules.

    Terminates because the universe of derivable triples is finite and
    the operator only adds triples.
    """
    by_premise: dict[int, list[SubsumptionRule]] = {}
    for rule in rules:
        by_premise.setdefault(rule.premise, []).append(rule)
    derived: set[Triple] = set(triples)
    provenance: dict[Triple, tuple[Triple, SubsumptionRule]] = {}
    queue = deque(derived)
    while queue:
        triple = queue.popleft()
        for rule in by_premise.get(triple.relation, ()):
            new = _apply_rule(triple, rule)
            if new not in derived:
                derived.add(new)
                provenance[new] = (triple, rule)
                queue.append(new)
    return ClosureResult(frozenset(derived), provenance)


def logical_hit1(test: Sequence[Triple], closure: ClosureResult) -> float:
    """Proportion of test triples present in the closure.

    A derived triple counts as rank 1 on both corruption sides; an absent
    one contributes 0 (only hit@1 is meaningful for pure inference).
    """
    if not test:
        raise ValueError("test split is empty")
    return sum(1 for t in test if t in closure.derived) / len(test)


def strip_redundant(
    train: Sequence[Triple], rules: Sequence[SubsumptionRule]
) -> tuple[list[Triple], list[Triple]]:
    """Drop every train triple derivable from the rest; returns (kept, removed).

    Triples are scanned in input order; a triple is dropped when it is
    derivable from the currently retained set excluding itself, so of a
    mutually-derivable pair exactly one survives. Guarantees
    closure(kept, rules) >= original train, and a second pass removes
    nothing.
    """
    if len(set(train)) != len(train):
        raise ValueError("duplicate triples in train")
    by_premise: dict[int, list[SubsumptionRule]] = {}
    for rule in rules:
        by_premise.setdefault(rule.premise, []).append(rule)

    def _image(triple: Triple) -> set[Triple]:
        # closure({triple}) \ {triple}: what this triple alone derives
        seen = {triple}
        queue = deque([triple])
        while queue:
            cur = queue.popleft()
            for rule in by_premise.get(cur.relation, ()):
                new = _apply_rule(cur, rule)
                if new not in seen:
                    seen.add(new)
                    queue.append(new)
        seen.discard(triple)
        return seen

    images = [_image(t) for t in train]
    # derivers[u] = indices of retained triples whose image contains u.
    derivers: dict[Triple, set[int]] = {}
    for i, img in enumerate(images):
        for u in img:
            derivers.setdefault(u, set()).add(i)

    kept: list[Triple] = []
    removed: list[Triple] = []
    for i, triple in enumerate(train):
        if derivers.get(triple):
            removed.append(triple)
            for u in images[i]:
                derivers[u].discard(i)
        else:
            kept.append(triple)
    return kept, removed
