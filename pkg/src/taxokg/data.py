"""Triple and rule file handling: vocabularies, splits, membership index.

File formats (bit-exact contracts for the shipped fixtures):

* triple files:  ``head<TAB>relation<TAB>tail<NEWLINE>``, no header
* rule files:    ``premise<TAB>direct|inverse<TAB>conclusion<NEWLINE>``

Names are UTF-8 and may not contain whitespace; tabs are the only
delimiter. A parsed :class:`TripleStore` / :class:`Vocabulary` is treated
as immutable afterwards and is safe for unrestricted concurrent reads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .rng import substream


class ParseError(ValueError):
    """A triple or rule file is malformed."""


class Direction(Enum):
    """How a subsumption rule maps a premise triple onto its conclusion."""

    DIRECT = "direct"    # (x, premise, y) -> (x, conclusion, y)
    INVERSE = "inverse"  # (x, premise, y) -> (y, conclusion, x)


class Triple(NamedTuple):
    head: int
    relation: int
    tail: int


class SubsumptionRule(NamedTuple):
    premise: int
    conclusion: int
    direction: Direction


class Vocabulary:
    """Bidirectional string<->integer-id maps for entities and relations.

    Ids are dense, 0-based, and assigned in first-appearance order over
    the splits as they are parsed (train, then valid, then test).
    """

    __slots__ = ("entity_names", "relation_names", "_entity_ids", "_relation_ids")

    def __init__(self) -> None:
        self.entity_names: list[str] = []
        self.relation_names: list[str] = []
        self._entity_ids: dict[str, int] = {}
        self._relation_ids: dict[str, int] = {}

    @property
    def n_entities(self) -> int:
        return len(self.entity_names)

    @property
    def n_relations(self) -> int:
        return len(self.relation_names)

    def add_entity(self, name: str) -> int:
        eid = self._entity_ids.get(name)
        if eid is None:
            eid = len(self.entity_names)
            self._entity_ids[name] = eid
            self.entity_names.append(name)
        return eid

    def add_relation(self, name: str) -> int:
        rid = self._relation_ids.get(name)
        if rid is None:
            rid = len(self.relation_names)
            self._relation_ids[name] = rid
            self.relation_names.append(name)
        return rid

    def entity_id(self, name: str) -> int:
        return self._entity_ids[name]

    def relation_id(self, name: str) -> int:
        return self._relation_ids[name]

    def entity_name(self, eid: int) -> str:
        return self.entity_names[eid]

    def relation_name(self, rid: int) -> str:
        return self.relation_names[rid]

    def has_entity(self, name: str) -> bool:
        return name in self._entity_ids

    def has_relation(self, name: str) -> bool:
        return name in self._relation_ids


@dataclass(frozen=True)
class TripleStore:
    """Id-encoded triples per split plus a membership index over all splits.

    ``known`` indexes the union of train, valid and test; it is what
    filtered ranking consults. After :func:`subsample_train` (or after
    training on a redundancy-stripped file), ``known`` deliberately keeps
    the full original contents so filtered evaluation stays correct.
    """

    train: tuple[Triple, ...]
    valid: tuple[Triple, ...]
    test: tuple[Triple, ...]
    known: frozenset[Triple]

    def with_train(self, new_train: Sequence[Triple]) -> "TripleStore":
        """Store with a replaced train list; membership index unchanged."""
        return replace(self, train=tuple(new_train))


@dataclass(frozen=True)
class Dataset:
    store: TripleStore
    vocab: Vocabulary
    rules: tuple[SubsumptionRule, ...]


def _check_name(field: str, lineno: int) -> None:
    if not field:
        raise ParseError(f"line {lineno}: empty field")
    if any(c.isspace() for c in field):
        raise ParseError(f"line {lineno}: whitespace inside name {field!r}")


def parse_triple_file(lines: Iterable[str], vocab: Vocabulary) -> list[Triple]:
    """Parse a triple stream, appending new names to `vocab`.

    Returns one Triple per non-empty line, in file order.
    """
    triples: list[Triple] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(
                f"line {lineno}: expected 3 tab-separated fields, got {len(fields)}"
            )
        for f in fields:
            _check_name(f, lineno)
        head, rel, tail = fields
        triples.append(
            Triple(vocab.add_entity(head), vocab.add_relation(rel), vocab.add_entity(tail))
        )
    return triples


_DIRECTIONS = {"direct": Direction.DIRECT, "inverse": Direction.INVERSE}


def parse_rule_file(lines: Iterable[str], vocab: Vocabulary) -> list[SubsumptionRule]:
    """Parse subsumption rules; relation names must already exist in `vocab`.

    Rules are parsed after the triple files, so every relation they
    mention has an id. Duplicate rules are rejected, as is a direct rule
    whose premise equals its conclusion (a trivial subsumption).
    """
    rules: list[SubsumptionRule] = []
    seen: set[SubsumptionRule] = set()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(
                f"line {lineno}: expected 3 tab-separated fields, got {len(fields)}"
            )
        premise_name, dir_token, conclusion_name = fields
        for f in fields:
            _check_name(f, lineno)
        if dir_token not in _DIRECTIONS:
            raise ParseError(
                f"line {lineno}: bad direction {dir_token!r} (expected direct|inverse)"
            )
        for name in (premise_name, conclusion_name):
            if not vocab.has_relation(name):
                raise ParseError(f"line {lineno}: unknown relation {name!r}")
        rule = SubsumptionRule(
            vocab.relation_id(premise_name),
            vocab.relation_id(conclusion_name),
            _DIRECTIONS[dir_token],
        )
        if rule.premise == rule.conclusion and rule.direction is Direction.DIRECT:
            raise ParseError(f"line {lineno}: trivial direct rule {premise_name!r} -> itself")
        if rule in seen:
            raise ParseError(f"line {lineno}: duplicate rule")
        seen.add(rule)
        rules.append(rule)
    return rules


def make_store(
    train: Sequence[Triple],
    valid: Sequence[Triple] = (),
    test: Sequence[Triple] = (),
) -> TripleStore:
    """Assemble a store, enforcing the no-duplicates-within-a-split invariant."""
    for name, split in (("train", train), ("valid", valid), ("test", test)):
        if len(set(split)) != len(split):
            raise ValueError(f"duplicate triples in {name} split")
    known = frozenset(train) | frozenset(valid) | frozenset(test)
    return TripleStore(tuple(train), tuple(valid), tuple(test), known)


def load_dataset(
    train_path: str | Path,
    test_path: str | Path | None = None,
    valid_path: str | Path | None = None,
    rules_path: str | Path | None = None,
) -> Dataset:
    """Load triple files (train, then valid, then test) plus optional rules."""
    vocab = Vocabulary()

    def _read_triples(path: str | Path) -> list[Triple]:
        with open(path, encoding="utf-8") as fh:
            return parse_triple_file(fh, vocab)

    train = _read_triples(train_path)
    valid = _read_triples(valid_path) if valid_path else []
    test = _read_triples(test_path) if test_path else []
    rules: list[SubsumptionRule] = []
    if rules_path:
        with open(rules_path, encoding="utf-8") as fh:
            rules = parse_rule_file(fh, vocab)
    return Dataset(make_store(train, valid, test), vocab, tuple(rules))


def triples_to_lines(triples: Iterable[Triple], vocab: Vocabulary) -> Iterable[str]:
    for h, r, t in triples:
        yield f"{vocab.entity_name(h)}\t{vocab.relation_name(r)}\t{vocab.entity_name(t)}\n"


def write_triples(path: str | Path, triples: Iterable[Triple], vocab: Vocabulary) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.writelines(triples_to_lines(triples, vocab))


def rules_to_lines(rules: Iterable[SubsumptionRule], vocab: Vocabulary) -> Iterable[str]:
    for premise, conclusion, direction in rules:
        yield (
            f"{vocab.relation_name(premise)}\t{direction.value}\t"
            f"{vocab.relation_name(conclusion)}\n"
        )


def subsample_train(store: TripleStore, fraction: float, seed: int) -> TripleStore:
    """Uniform subsample (without replacement) of the train split.

    Keeps ceil(fraction * |train|) triples in their original order.
    Valid/test are untouched and the membership index is kept from the
    full original splits so filtered evaluation stays correct.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    n = len(store.train)
    m = math.ceil(fraction * n)
    rng = substream(seed, "subsample")
    idx = np.sort(rng.choice(n, size=m, replace=False)) if m < n else np.arange(n)
    return store.with_train([store.train[i] for i in idx])


def dataset_stats(dataset: Dataset) -> dict[str, int]:
    return {
        "n_entities": dataset.vocab.n_entities,
        "n_relations": dataset.vocab.n_relations,
        "n_train": len(dataset.store.train),
        "n_valid": len(dataset.store.valid),
        "n_test": len(dataset.store.test),
        "n_rules": len(dataset.rules),
    }
