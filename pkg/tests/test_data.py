from __future__ import annotations

import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from taxokg.data import (
    Direction,
    ParseError,
    Triple,
    Vocabulary,
    load_dataset,
    make_store,
    parse_rule_file,
    parse_triple_file,
    subsample_train,
    triples_to_lines,
)


def test_parse_single_line():
    vocab = Vocabulary()
    triples = parse_triple_file(["paris\tcapitalOf\tfrance\n"], vocab)
    assert triples == [Triple(0, 0, 1)]
    assert vocab.n_entities == 2
    assert vocab.n_relations == 1


def test_parse_ids_first_appearance_order():
    vocab = Vocabulary()
    parse_triple_file(["b\tr\ta\n", "a\ts\tc\n"], vocab)
    assert vocab.entity_names == ["b", "a", "c"]
    assert vocab.relation_names == ["r", "s"]


def test_parse_rejects_wrong_field_count():
    with pytest.raises(ParseError, match="line 2"):
        parse_triple_file(["a\tr\tb\n", "a\tr\n"], Vocabulary())


def test_parse_rejects_empty_field():
    with pytest.raises(ParseError, match="empty field"):
        parse_triple_file(["a\t\tb\n"], Vocabulary())


def test_parse_rejects_whitespace_in_name():
    with pytest.raises(ParseError, match="whitespace"):
        parse_triple_file(["a b\tr\tc\n"], Vocabulary())


def test_parse_skips_blank_lines():
    vocab = Vocabulary()
    triples = parse_triple_file(["a\tr\tb\n", "\n", "c\tr\td\n"], vocab)
    assert len(triples) == 2


def test_rule_parsing_directions():
    vocab = Vocabulary()
    parse_triple_file(["a\tr\tb\n", "a\ts\tb\n"], vocab)
    rules = parse_rule_file(["r\tdirect\ts\n", "s\tinverse\tr\n"], vocab)
    assert rules[0].direction is Direction.DIRECT
    assert rules[1].direction is Direction.INVERSE


def test_rule_empty_file():
    assert parse_rule_file([], Vocabulary()) == []


def test_rule_unknown_relation_named():
    vocab = Vocabulary()
    parse_triple_file(["a\tr\tb\n"], vocab)
    with pytest.raises(ParseError, match="'nope'"):
        parse_rule_file(["r\tdirect\tnope\n"], vocab)


def test_rule_bad_direction_token():
    vocab = Vocabulary()
    parse_triple_file(["a\tr\tb\n", "a\ts\tb\n"], vocab)
    with pytest.raises(ParseError, match="direction"):
        parse_rule_file(["r\tboth\ts\n"], vocab)


def test_rule_duplicates_rejected():
    vocab = Vocabulary()
    parse_triple_file(["a\tr\tb\n", "a\ts\tb\n"], vocab)
    with pytest.raises(ParseError, match="duplicate"):
        parse_rule_file(["r\tdirect\ts\n", "r\tdirect\ts\n"], vocab)


def test_rule_trivial_direct_rejected():
    vocab = Vocabulary()
    parse_triple_file(["a\tr\tb\n"], vocab)
    with pytest.raises(ParseError, match="trivial"):
        parse_rule_file(["r\tdirect\tr\n"], vocab)


def test_duplicate_triples_in_split_rejected():
    t = Triple(0, 0, 1)
    with pytest.raises(ValueError, match="duplicate"):
        make_store([t, t])


def test_membership_index_matches_linear_scan(sport):
    store = sport.store
    everything = list(store.train) + list(store.valid) + list(store.test)
    for triple in everything[::37]:
        assert triple in store.known
        assert everything.count(triple) >= 1
    absent = Triple(0, 0, 0)
    assert (absent in store.known) == (absent in everything)


def test_subsample_identity():
    store = make_store([Triple(0, 0, i) for i in range(1, 7)])
    sub = subsample_train(store, 1.0, seed=3)
    assert sub.train == store.train


def test_subsample_ceiling_and_known(sport):
    sub = subsample_train(sport.store, 0.5, seed=0)
    assert len(sub.train) == 656  # ceil(0.5 * 1312)
    assert sub.known == sport.store.known
    assert sub.test == sport.store.test


def test_subsample_deterministic(sport):
    a = subsample_train(sport.store, 0.3, seed=9)
    b = subsample_train(sport.store, 0.3, seed=9)
    assert a.train == b.train
    c = subsample_train(sport.store, 0.3, seed=10)
    assert a.train != c.train


@pytest.mark.parametrize("fraction", [0.0, -0.5, 1.5])
def test_subsample_rejects_bad_fraction(sport, fraction):
    with pytest.raises(ValueError):
        subsample_train(sport.store, fraction, seed=0)


names = st.text(alphabet="abcdefgh", min_size=1, max_size=4)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(names, names, names), min_size=1, max_size=30))
def test_roundtrip_serialize_reparse(raw_triples):
    vocab = Vocabulary()
    lines = [f"{h}\t{r}\t{t}\n" for h, r, t in raw_triples]
    triples = parse_triple_file(lines, vocab)
    out = list(triples_to_lines(triples, vocab))
    vocab2 = Vocabulary()
    reparsed = parse_triple_file(out, vocab2)
    assert reparsed == triples
    assert vocab2.entity_names == vocab.entity_names
    assert vocab2.relation_names == vocab.relation_names


@settings(max_examples=50, deadline=None)
@given(st.lists(names, min_size=1, max_size=30))
def test_vocabulary_bijection(entity_names):
    vocab = Vocabulary()
    for name in entity_names:
        vocab.add_entity(name)
    n = vocab.n_entities
    assert sorted(vocab.entity_id(vocab.entity_name(i)) for i in range(n)) == list(range(n))
    for name in set(entity_names):
        assert vocab.entity_name(vocab.entity_id(name)) == name


def test_load_dataset_roundtrip_files(tmp_path, location):
    out = tmp_path / "train.tsv"
    with open(out, "w", encoding="utf-8") as fh:
        fh.writelines(triples_to_lines(location.store.train, location.vocab))
    reloaded = load_dataset(out)
    assert list(reloaded.store.train) == list(location.store.train)
