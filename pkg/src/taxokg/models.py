"""Embedding storage and scoring for SimplE, SimplE+ and ComplEx.

All three models score a triple with multilinear products of per-entity
and per-relation vectors (probability = sigmoid of the score):

* SimplE keeps a head-role and a tail-role vector per entity and a
  forward/backward vector pair per relation; the score averages the
  forward term <h_head, r_fwd, t_tail> and the backward term
  <t_head, r_bwd, h_tail>.
* SimplE+ is SimplE with entity embeddings forced non-negative by an
  element-wise nonlinearity applied before scoring, which makes scores
  monotone in the relation vectors and lets a rule "premise implies
  conclusion" be enforced by tying premise = conclusion - relu(delta).
* ComplEx treats (head-role, tail-role) as (real, imaginary) parts of a
  complex vector and scores Re(<h, r, conj(t)>).

Relation ties are resolved recursively (rule chains compose) and cycles
of mutually-subsuming relations are collapsed to exact equality at model
construction time, never at score time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .data import Direction, SubsumptionRule, Triple, Vocabulary
from .rng import substream


class Nonlinearity(Enum):
    """Element-wise map applied to raw entity parameters before scoring."""

    IDENTITY = "identity"
    EXP = "exp"
    LOGISTIC = "logistic"
    RELU = "relu"

    def apply(self, x: np.ndarray) -> np.ndarray:
        if self is Nonlinearity.IDENTITY:
            return x
        if self is Nonlinearity.EXP:
            return np.exp(x)
        if self is Nonlinearity.LOGISTIC:
            return 1.0 / (1.0 + np.exp(-x))
        return np.maximum(x, 0.0)

    def derivative(self, x: np.ndarray) -> np.ndarray:
        """d phi / dx at the raw parameter value (relu subgradient at 0 is 0)."""
        if self is Nonlinearity.IDENTITY:
            return np.ones_like(x)
        if self is Nonlinearity.EXP:
            return np.exp(x)
        if self is Nonlinearity.LOGISTIC:
            s = 1.0 / (1.0 + np.exp(-x))
            return s * (1.0 - s)
        return (x > 0.0).astype(x.dtype)


class ModelKind(Enum):
    SIMPLE = "simple"
    SIMPLE_PLUS = "simple-plus"
    COMPLEX = "complex"


@dataclass(frozen=True)
class RelationTie:
    """One resolved constraint edge: premise tied to `conclusion`.

    ``delta_row`` indexes the learnable delta matrices; ``None`` means the
    delta is fixed at zero (a collapsed mutual-subsumption cycle member).
    A tie whose conclusion equals the premise encodes a declared symmetric
    relation: its effective backward vector is its forward vector.
    """

    conclusion: int
    direction: Direction
    delta_row: int | None


def build_ties(
    rules: Sequence[SubsumptionRule], relation_names: Sequence[str]
) -> tuple[dict[int, RelationTie], int, tuple[int, ...]]:
    """Derive the constraint graph from rules, collapsing cycles.

    Each premise relation may be tied to exactly one conclusion. Cycles
    (mutually-subsuming groups, logically equivalences) are collapsed by
    making the lexicographically-smallest relation name the free
    parameter holder and tying the remaining members with delta fixed at
    zero. Returns (ties, number of learnable delta rows, resolution order
    with conclusions before premises).
    """
    out: dict[int, SubsumptionRule] = {}
    for rule in rules:
        if rule.premise in out and out[rule.premise] != rule:
            raise ValueError(
                f"relation {relation_names[rule.premise]!r} is the premise of two "
                "different rules; a relation can be tied to only one conclusion"
            )
        out[rule.premise] = rule

    ties: dict[int, RelationTie] = {}
    free_delta = 0
    # Every node has at most one outgoing edge, so each cycle is a simple
    # loop reachable by following edges until a repeat.
    state: dict[int, int] = {}  # 1 = on current walk, 2 = finished
    cycle_members: set[int] = set()
    for start in sorted(out):
        if state.get(start) == 2:
            continue
        walk: list[int] = []
        node = start
        while node in out and state.get(node) != 2:
            if state.get(node) == 1:
                cycle = walk[walk.index(node):]
                holder = min(cycle, key=lambda r: relation_names[r])
                cycle_members.update(cycle)
                for member in cycle:
                    if member == holder and len(cycle) > 1:
                        continue  # holder's own edge is dropped, it stays free
                    rule = out[member]
                    ties[member] = RelationTie(rule.conclusion, rule.direction, None)
                break
            state[node] = 1
            walk.append(node)
            node = out[node].conclusion
        for node in walk:
            state[node] = 2

    for premise in sorted(out):
        if premise in cycle_members or premise in ties:
            continue
        rule = out[premise]
        ties[premise] = RelationTie(rule.conclusion, rule.direction, free_delta)
        free_delta += 1

    order = _resolution_order(ties, len(relation_names))
    return ties, free_delta, order


def _resolution_order(ties: dict[int, RelationTie], n_relations: int) -> tuple[int, ...]:
    """Constrained relations ordered so a conclusion resolves before its premises."""
    depth: dict[int, int] = {}

    def _depth(rid: int, trail: tuple[int, ...] = ()) -> int:
        if rid in depth:
            return depth[rid]
        tie = ties.get(rid)
        if tie is None or tie.conclusion == rid:
            depth[rid] = 0 if tie is None else 1
            return depth[rid]
        if rid in trail:
            raise ValueError(f"unresolved cycle in constraint graph at relation {rid}")
        depth[rid] = 1 + _depth(tie.conclusion, trail + (rid,))
        return depth[rid]

    for rid in range(n_relations):
        _depth(rid)
    constrained = [rid for rid in ties]
    constrained.sort(key=lambda r: (depth[r], r))
    return tuple(constrained)


@dataclass
class EmbeddingModel:
    """Raw parameters plus the resolved constraint structure.

    Scoring is pure given an immutable snapshot; training mutates the
    arrays in place under a single-writer contract.
    """

    kind: ModelKind
    dim: int
    phi: Nonlinearity
    entity_head: np.ndarray    # |E| x k raw head-role parameters
    entity_tail: np.ndarray    # |E| x k raw tail-role parameters
    relation_fwd: np.ndarray   # |R| x k (Re(r) for ComplEx)
    relation_bwd: np.ndarray   # |R| x k (Im(r) for ComplEx)
    delta_fwd: np.ndarray      # n_deltas x k raw (pre-relu) delta parameters
    delta_bwd: np.ndarray
    rules: tuple[SubsumptionRule, ...] = ()
    ties: dict[int, RelationTie] = field(default_factory=dict)
    resolution_order: tuple[int, ...] = ()

    @property
    def n_entities(self) -> int:
        return self.entity_head.shape[0]

    @property
    def n_relations(self) -> int:
        return self.relation_fwd.shape[0]

    def parameter_arrays(self) -> dict[str, np.ndarray]:
        return {
            "entity_head": self.entity_head,
            "entity_tail": self.entity_tail,
            "relation_fwd": self.relation_fwd,
            "relation_bwd": self.relation_bwd,
            "delta_fwd": self.delta_fwd,
            "delta_bwd": self.delta_bwd,
        }


def multilinear_product(x: np.ndarray, y: np.ndarray, z: np.ndarray) -> float:
    """Sum of the element-wise product of three equal-length vectors."""
    x, y, z = np.asarray(x, float), np.asarray(y, float), np.asarray(z, float)
    if not (x.shape == y.shape == z.shape and x.ndim == 1):
        raise ValueError(f"length mismatch: {x.shape}, {y.shape}, {z.shape}")
    return float(np.sum(x * y * z))


def embed_entity(model: EmbeddingModel, entity: int, role: str) -> np.ndarray:
    """Entity vector as consumed by scoring: phi applied to the raw row."""
    if role not in ("head", "tail"):
        raise ValueError(f"role must be 'head' or 'tail', got {role!r}")
    row = model.entity_head[entity] if role == "head" else model.entity_tail[entity]
    return model.phi.apply(row)


def effective_relation(model: EmbeddingModel, relation: int) -> tuple[np.ndarray, np.ndarray]:
    """(forward, backward) vectors after resolving any constraint chain.

    Unconstrained relations return their raw rows. A direct-constrained
    premise returns conclusion - relu(delta) on both halves; an
    inverse-constrained premise additionally swaps the conclusion's
    forward/backward halves. Chains resolve recursively.
    """
    tie = model.ties.get(relation)
    if tie is None:
        return model.relation_fwd[relation].copy(), model.relation_bwd[relation].copy()
    if tie.conclusion == relation:  # declared symmetric relation
        fwd = model.relation_fwd[relation].copy()
        return fwd, fwd.copy()
    base_fwd, base_bwd = effective_relation(model, tie.conclusion)
    if tie.direction is Direction.INVERSE:
        base_fwd, base_bwd = base_bwd, base_fwd
    if tie.delta_row is not None:
        base_fwd = base_fwd - np.maximum(model.delta_fwd[tie.delta_row], 0.0)
        base_bwd = base_bwd - np.maximum(model.delta_bwd[tie.delta_row], 0.0)
    return base_fwd, base_bwd


def effective_relation_matrices(model: EmbeddingModel) -> tuple[np.ndarray, np.ndarray]:
    """Full |R| x k effective forward/backward matrices (vectorized resolve)."""
    fwd = model.relation_fwd.copy()
    bwd = model.relation_bwd.copy()
    for rid in model.resolution_order:
        tie = model.ties[rid]
        if tie.conclusion == rid:
            bwd[rid] = fwd[rid] = model.relation_fwd[rid]
            continue
        base_fwd, base_bwd = fwd[tie.conclusion], bwd[tie.conclusion]
        if tie.direction is Direction.INVERSE:
            base_fwd, base_bwd = base_bwd, base_fwd
        if tie.delta_row is not None:
            base_fwd = base_fwd - np.maximum(model.delta_fwd[tie.delta_row], 0.0)
            base_bwd = base_bwd - np.maximum(model.delta_bwd[tie.delta_row], 0.0)
        fwd[rid] = base_fwd
        bwd[rid] = base_bwd
    return fwd, bwd


def score_simple(model: EmbeddingModel, triple: Triple) -> float:
    """Pre-sigmoid SimplE / SimplE+ score, averaging forward and backward terms."""
    if model.kind not in (ModelKind.SIMPLE, ModelKind.SIMPLE_PLUS):
        raise ValueError(f"score_simple requires a SimplE-family model, got {model.kind}")
    h, r, t = triple
    r_fwd, r_bwd = effective_relation(model, r)
    forward = multilinear_product(embed_entity(model, h, "head"), r_fwd,
                                  embed_entity(model, t, "tail"))
    backward = multilinear_product(embed_entity(model, t, "head"), r_bwd,
                                   embed_entity(model, h, "tail"))
    return 0.5 * (forward + backward)


def score_complex(model: EmbeddingModel, triple: Triple) -> float:
    """Pre-sigmoid ComplEx score Re(<h, r, conj(t)>) in its four-term real form.

    Entity vectors are head_row + i*tail_row; relation vectors are
    fwd_row + i*bwd_row.
    """
    if model.kind is not ModelKind.COMPLEX:
        raise ValueError(f"score_complex requires a ComplEx model, got {model.kind}")
    h, r, t = triple
    a, b = model.entity_head[h], model.entity_tail[h]
    c, d = model.relation_fwd[r], model.relation_bwd[r]
    e, f = model.entity_head[t], model.entity_tail[t]
    return float(np.sum(a * c * e + b * c * f + a * d * f - b * d * e))


def score(model: EmbeddingModel, triple: Triple) -> float:
    if model.kind is ModelKind.COMPLEX:
        return score_complex(model, triple)
    return score_simple(model, triple)


def sigmoid(x):
    arr = np.atleast_1d(np.asarray(x, float))
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    ex = np.exp(arr[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out.reshape(np.shape(x))


def probability(model: EmbeddingModel, triple: Triple) -> float:
    return float(sigmoid(score(model, triple)))


def score_batch(
    model: EmbeddingModel,
    heads: np.ndarray,
    relations: np.ndarray,
    tails: np.ndarray,
) -> np.ndarray:
    """Vectorized scores for aligned id arrays."""
    if model.kind is ModelKind.COMPLEX:
        a, b = model.entity_head[heads], model.entity_tail[heads]
        c, d = model.relation_fwd[relations], model.relation_bwd[relations]
        e, f = model.entity_head[tails], model.entity_tail[tails]
        return np.sum(a * c * e + b * c * f + a * d * f - b * d * e, axis=1)
    rf, rb = effective_relation_matrices(model)
    hh = model.phi.apply(model.entity_head[heads])
    tt = model.phi.apply(model.entity_tail[tails])
    th = model.phi.apply(model.entity_head[tails])
    ht = model.phi.apply(model.entity_tail[heads])
    fwd = np.sum(hh * rf[relations] * tt, axis=1)
    bwd = np.sum(th * rb[relations] * ht, axis=1)
    return 0.5 * (fwd + bwd)


def init_params(
    kind: ModelKind,
    n_entities: int,
    n_relations: int,
    dim: int,
    *,
    phi: Nonlinearity | None = None,
    rules: Sequence[SubsumptionRule] = (),
    relation_names: Sequence[str] | None = None,
    seed: int = 0,
) -> EmbeddingModel:
    """Fresh model with parameters ~ N(0, 1/k) and raw deltas at zero.

    Rules (constraint enforcement) require a SimplE+ model: the other
    kinds cannot guarantee the resulting inequalities. The nonlinearity
    defaults to relu for SimplE+ and is pinned to identity otherwise.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if n_entities < 1 or n_relations < 1:
        raise ValueError("need at least one entity and one relation")
    if rules and kind is not ModelKind.SIMPLE_PLUS:
        raise ValueError("subsumption constraints require the simple-plus model kind")
    if kind is ModelKind.SIMPLE_PLUS:
        phi = Nonlinearity.RELU if phi is None else phi
    else:
        if phi not in (None, Nonlinearity.IDENTITY):
            raise ValueError(f"{kind.value} does not take a nonlinearity")
        phi = Nonlinearity.IDENTITY

    ties: dict[int, RelationTie] = {}
    n_deltas = 0
    order: tuple[int, ...] = ()
    if rules:
        if relation_names is None:
            raise ValueError("relation_names are required when rules are given")
        ties, n_deltas, order = build_ties(rules, relation_names)

    rng = substream(seed, "init")
    scale = 1.0 / np.sqrt(dim)
    return EmbeddingModel(
        kind=kind,
        dim=dim,
        phi=phi,
        entity_head=rng.normal(0.0, scale, (n_entities, dim)),
        entity_tail=rng.normal(0.0, scale, (n_entities, dim)),
        relation_fwd=rng.normal(0.0, scale, (n_relations, dim)),
        relation_bwd=rng.normal(0.0, scale, (n_relations, dim)),
        delta_fwd=np.zeros((n_deltas, dim)),
        delta_bwd=np.zeros((n_deltas, dim)),
        rules=tuple(rules),
        ties=ties,
        resolution_order=order,
    )


# --------------------------------------------------------------------------
# Checkpoints.
#
# Two containers, chosen by file suffix:
#   *.json  text mode; floats serialized via repr so a round-trip is
#           bit-exact
#   *.npz   binary mode; arrays stored natively (value-exact), metadata in
#           an embedded JSON string
# Both store: kind, dim, phi, entity/relation names, the rule list (by
# name), all four parameter matrices and both raw delta matrices. The tie
# structure is rebuilt from the rules on load.
# --------------------------------------------------------------------------

_CHECKPOINT_FORMAT = "taxokg-model"
_CHECKPOINT_VERSION = 1


def _meta_dict(model: EmbeddingModel, vocab: Vocabulary) -> dict:
    return {
        "format": _CHECKPOINT_FORMAT,
        "version": _CHECKPOINT_VERSION,
        "kind": model.kind.value,
        "dim": model.dim,
        "phi": model.phi.value,
        "entity_names": list(vocab.entity_names),
        "relation_names": list(vocab.relation_names),
        "rules": [
            [vocab.relation_name(p), d.value, vocab.relation_name(c)]
            for p, c, d in model.rules
        ],
    }


def save_checkpoint(model: EmbeddingModel, vocab: Vocabulary, path: str | Path) -> None:
    path = Path(path)
    meta = _meta_dict(model, vocab)
    arrays = model.parameter_arrays()
    if path.suffix == ".json":
        payload = dict(meta)
        payload.update({name: arr.tolist() for name, arr in arrays.items()})
        path.write_text(json.dumps(payload), encoding="utf-8")
    elif path.suffix == ".npz":
        np.savez(
            path,
            meta=np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8),
            **arrays,
        )
    else:
        raise ValueError(f"unknown checkpoint suffix {path.suffix!r} (use .json or .npz)")


def load_checkpoint(path: str | Path) -> tuple[EmbeddingModel, Vocabulary]:
    path = Path(path)
    if path.suffix == ".json":
        payload = json.loads(path.read_text(encoding="utf-8"))
        meta = payload
        arrays = {
            name: np.asarray(payload[name], dtype=float)
            for name in (
                "entity_head", "entity_tail", "relation_fwd", "relation_bwd",
                "delta_fwd", "delta_bwd",
            )
        }
    elif path.suffix == ".npz":
        with np.load(path, allow_pickle=False) as blob:
            meta = json.loads(bytes(blob["meta"]).decode("utf-8"))
            arrays = {
                name: blob[name]
                for name in (
                    "entity_head", "entity_tail", "relation_fwd", "relation_bwd",
                    "delta_fwd", "delta_bwd",
                )
            }
    else:
        raise ValueError(f"unknown checkpoint suffix {path.suffix!r} (use .json or .npz)")
    if meta.get("format") != _CHECKPOINT_FORMAT:
        raise ValueError(f"{path}: not a model checkpoint")
    dim = int(meta["dim"])
    for name in ("delta_fwd", "delta_bwd"):
        if arrays[name].size == 0:  # json collapses (0, k) to []
            arrays[name] = arrays[name].reshape(0, dim)

    vocab = Vocabulary()
    for name in meta["entity_names"]:
        vocab.add_entity(name)
    for name in meta["relation_names"]:
        vocab.add_relation(name)
    rules = tuple(
        SubsumptionRule(
            vocab.relation_id(p), vocab.relation_id(c), Direction(d)
        )
        for p, d, c in meta["rules"]
    )
    ties: dict[int, RelationTie] = {}
    order: tuple[int, ...] = ()
    if rules:
        ties, n_deltas, order = build_ties(rules, meta["relation_names"])
        if n_deltas != arrays["delta_fwd"].shape[0]:
            raise ValueError(f"{path}: delta matrix does not match the stored rules")
    model = EmbeddingModel(
        kind=ModelKind(meta["kind"]),
        dim=dim,
        phi=Nonlinearity(meta["phi"]),
        rules=rules,
        ties=ties,
        resolution_order=order,
        **arrays,
    )
    if model.entity_head.shape[1] != dim:
        raise ValueError(f"{path}: matrix width disagrees with declared dim")
    return model, vocab
