"""Executable checks of the model-family guarantees.

Two constructive procedures build a non-negative SimplE-family model
realizing an arbitrary truth assignment over all triples (full
expressivity), one with embedding width |E||R| + 1 and one with width
|true facts| + 1. Both deviate slightly from the published sketches:

* block construction: as printed, false triples score 0 (probability
  exactly 0.5, not separated). Giving every entity's tail-role vector a
  1 in the last coordinate makes false triples score -1/2 and true ones
  +1/2. ``repair=False`` reproduces the unrepaired layout.
* incremental construction: the printed step sets the new tail
  coordinate to q + 1, which can be negative (illegal here) or too small;
  max(1, 1 - q) is non-negative and forces the new triple's score to at
  least +1/2.

Both repairs are validated against brute-force enumeration in the test
suite rather than taken on faith.

The counterexample operation demonstrates why models with sign-free
entity embeddings cannot enforce a non-trivial subsumption: negating an
entity's embedding negates every score it participates in, flipping the
probability ordering of any strict premise/conclusion witness.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable

import numpy as np

from .data import Direction, SubsumptionRule, Triple
from .models import (
    EmbeddingModel,
    ModelKind,
    Nonlinearity,
    effective_relation,
    probability,
    sigmoid,
)


@dataclass(frozen=True)
class WorldAssignment:
    """A complete truth assignment: listed facts true, everything else false."""

    n_entities: int
    n_relations: int
    true_facts: frozenset[Triple]

    def __post_init__(self) -> None:
        for h, r, t in self.true_facts:
            if not (0 <= h < self.n_entities and 0 <= t < self.n_entities
                    and 0 <= r < self.n_relations):
                raise ValueError(f"fact ({h},{r},{t}) outside the universe")

    def all_triples(self) -> Iterable[Triple]:
        for h, r, t in product(range(self.n_entities), range(self.n_relations),
                               range(self.n_entities)):
            yield Triple(h, r, t)


def random_world(
    n_entities: int, n_relations: int, n_facts: int, rng: np.random.Generator
) -> WorldAssignment:
    universe = n_entities * n_relations * n_entities
    picks = rng.choice(universe, size=min(n_facts, universe), replace=False)
    facts = set()
    for p in picks:
        h, rest = divmod(int(p), n_relations * n_entities)
        r, t = divmod(rest, n_entities)
        facts.add(Triple(h, r, t))
    return WorldAssignment(n_entities, n_relations, frozenset(facts))


def _empty_plus_model(n_entities: int, n_relations: int, dim: int) -> EmbeddingModel:
    z = lambda *shape: np.zeros(shape)
    return EmbeddingModel(
        kind=ModelKind.SIMPLE_PLUS,
        dim=dim,
        phi=Nonlinearity.RELU,
        entity_head=z(n_entities, dim),
        entity_tail=z(n_entities, dim),
        relation_fwd=z(n_relations, dim),
        relation_bwd=z(n_relations, dim),
        delta_fwd=z(0, dim),
        delta_bwd=z(0, dim),
    )


def construct_block_model(world: WorldAssignment, repair: bool = True) -> EmbeddingModel:
    """Width |E||R| + 1 model separating the world's truth assignment.

    Relation i's forward row is 1 on block i and -1 at the last index;
    entity j's head row is 1 at positions congruent to j mod |E| and at
    the last index; a true fact (e_j, r_i, e_k) puts a 2 at position
    i|E| + j of e_k's tail row. With the repair, every tail row also has
    a 1 at the last index, so a triple scores +1/2 when true and -1/2
    when false. Backward relation rows stay zero.
    """
    if world.n_entities < 1 or world.n_relations < 1:
        raise ValueError("world must have at least one entity and one relation")
    nE, nR = world.n_entities, world.n_relations
    dim = nE * nR + 1
    model = _empty_plus_model(nE, nR, dim)
    for i in range(nR):
        model.relation_fwd[i, i * nE:(i + 1) * nE] = 1.0
        model.relation_fwd[i, dim - 1] = -1.0
    for j in range(nE):
        model.entity_head[j, j:dim - 1:nE] = 1.0
        model.entity_head[j, dim - 1] = 1.0
    if repair:
        model.entity_tail[:, dim - 1] = 1.0
    for h, r, t in world.true_facts:
        model.entity_tail[t, r * nE + h] = 2.0
    return model


def construct_incremental_model(world: WorldAssignment) -> EmbeddingModel:
    """Width |true facts| + 1 model built fact by fact.

    Base case (no facts): width 1, entity values 1 and relation values
    -1, so every triple scores -1. Each added fact appends a zero
    coordinate everywhere, then sets the head's head-role coordinate and
    the relation's forward coordinate to 1 and the tail's tail-role
    coordinate to max(1, 1 - q), where q is the fact's unscaled score sum
    before the update. No other triple's score changes, and entity
    coordinates stay non-negative.
    """
    if world.n_entities < 1 or world.n_relations < 1:
        raise ValueError("world must have at least one entity and one relation")
    nE, nR = world.n_entities, world.n_relations
    eh = np.ones((nE, 1))
    et = np.ones((nE, 1))
    rf = -np.ones((nR, 1))
    rb = -np.ones((nR, 1))
    for h, r, t in sorted(world.true_facts):
        q = float(np.sum(eh[h] * rf[r] * et[t]) + np.sum(eh[t] * rb[r] * et[h]))
        eh = np.hstack([eh, np.zeros((nE, 1))])
        et = np.hstack([et, np.zeros((nE, 1))])
        rf = np.hstack([rf, np.zeros((nR, 1))])
        rb = np.hstack([rb, np.zeros((nR, 1))])
        eh[h, -1] = 1.0
        rf[r, -1] = 1.0
        et[t, -1] = max(1.0, 1.0 - q)
    model = _empty_plus_model(nE, nR, eh.shape[1])
    model.entity_head = eh
    model.entity_tail = et
    model.relation_fwd = rf
    model.relation_bwd = rb
    return model


def check_world_separation(
    model: EmbeddingModel, world: WorldAssignment, threshold: float = 0.5
) -> tuple[bool, float]:
    """Classify every triple of the universe; returns (all correct, min margin)."""
    ok = True
    min_margin = np.inf
    for triple in world.all_triples():
        p = probability(model, triple)
        truth = triple in world.true_facts
        if (p > threshold) != truth:
            ok = False
        min_margin = min(min_margin, abs(p - threshold))
    return ok, float(min_margin)


@dataclass(frozen=True)
class Counterexample:
    """A legal embedding violating a claimed subsumption ordering.

    The witness entity's negation has, by multilinearity, exactly the
    complementary probabilities, so the premise/conclusion ordering
    reverses at (negated head, tail).
    """

    negated_head: tuple[np.ndarray, np.ndarray]  # (head-role, tail-role) of -a
    mu_conclusion: float
    mu_premise: float
    mu_conclusion_flipped: float
    mu_premise_flipped: float


def _score_with_head_vectors(
    model: EmbeddingModel, head_vecs: tuple[np.ndarray, np.ndarray], r: int, t: int
) -> float:
    h_head, h_tail = head_vecs
    if model.kind is ModelKind.COMPLEX:
        a, b = h_head, h_tail
        c, d = model.relation_fwd[r], model.relation_bwd[r]
        e, f = model.entity_head[t], model.entity_tail[t]
        return float(np.sum(a * c * e + b * c * f + a * d * f - b * d * e))
    r_fwd, r_bwd = effective_relation(model, r)
    fwd = np.sum(h_head * r_fwd * model.entity_tail[t])
    bwd = np.sum(model.entity_head[t] * r_bwd * h_tail)
    return float(0.5 * (fwd + bwd))


def subsumption_counterexample(
    model: EmbeddingModel, rule: SubsumptionRule, head: int, tail: int
) -> Counterexample:
    """Why sign-free models cannot enforce a direct subsumption.

    Requires a strict witness: probability(head, conclusion, tail) >
    probability(head, premise, tail). Returns the negated head embedding
    together with the four probabilities certifying the reversed
    ordering. Inapplicable to SimplE+ models, whose legal entity
    embeddings are non-negative (the negation is not a legal embedding).
    """
    if model.kind is ModelKind.SIMPLE_PLUS:
        raise ValueError(
            "inapplicable to simple-plus: entity embeddings are non-negative, "
            "so the negated entity is not a legal embedding"
        )
    if rule.direction is not Direction.DIRECT:
        raise ValueError("counterexample construction applies to direct rules")
    a_vecs = (model.entity_head[head].copy(), model.entity_tail[head].copy())
    mu_s = float(sigmoid(_score_with_head_vectors(model, a_vecs, rule.conclusion, tail)))
    mu_r = float(sigmoid(_score_with_head_vectors(model, a_vecs, rule.premise, tail)))
    if not mu_s > mu_r:
        raise ValueError("trivial subsumption witness: no strict gap, no counterexample exists")
    neg = (-a_vecs[0], -a_vecs[1])
    mu_s_flip = float(sigmoid(_score_with_head_vectors(model, neg, rule.conclusion, tail)))
    mu_r_flip = float(sigmoid(_score_with_head_vectors(model, neg, rule.premise, tail)))
    return Counterexample(
        negated_head=neg,
        mu_conclusion=mu_s,
        mu_premise=mu_r,
        mu_conclusion_flipped=mu_s_flip,
        mu_premise_flipped=mu_r_flip,
    )
