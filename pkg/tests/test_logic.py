from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from taxokg.data import Direction, SubsumptionRule, Triple
from taxokg.logic import forward_closure, logical_hit1, strip_redundant
from taxokg.rng import substream

from oracles import closure_by_repeated_scan

# Sport-style rule graph over relation ids 0..4
ALST, APFT, CT, OHP, PBTO = range(5)
SPORT_RULES = (
    SubsumptionRule(ALST, APFT, Direction.DIRECT),
    SubsumptionRule(APFT, PBTO, Direction.DIRECT),
    SubsumptionRule(CT, PBTO, Direction.DIRECT),
    SubsumptionRule(OHP, PBTO, Direction.INVERSE),
    SubsumptionRule(PBTO, OHP, Direction.INVERSE),
)
# Location-style: 0 = CapitalCityOfCountry, 1 = CityLocatedInCountry,
# 2 = StateHasCapital, 3 = CityLocatedInState
LOCATION_RULES = (
    SubsumptionRule(0, 1, Direction.DIRECT),
    SubsumptionRule(2, 3, Direction.INVERSE),
)


def test_closure_no_rules_identity():
    triples = [Triple(0, 0, 1), Triple(1, 1, 2)]
    closure = forward_closure(triples, ())
    assert closure.derived == frozenset(triples)
    assert closure.provenance == {}


def test_closure_sport_chain():
    start = Triple(0, ALST, 1)
    closure = forward_closure([start], SPORT_RULES)
    assert closure.derived == {
        start,
        Triple(0, APFT, 1),
        Triple(0, PBTO, 1),
        Triple(1, OHP, 0),
    }
    # every derived triple has a witness
    for triple in closure.derived - {start}:
        source, rule = closure.provenance[triple]
        assert source in closure.derived
        assert rule in SPORT_RULES


def test_closure_is_fixpoint():
    rng = substream(0, "closure")
    triples = {Triple(int(h), int(r), int(t))
               for h, r, t in zip(rng.integers(0, 12, 40), rng.integers(0, 5, 40),
                                  rng.integers(0, 12, 40))}
    closure = forward_closure(sorted(triples), SPORT_RULES)
    again = forward_closure(sorted(closure.derived), SPORT_RULES)
    assert again.derived == closure.derived


def test_closure_matches_repeated_scan_oracle():
    rng = substream(1, "closure")
    for trial in range(10):
        triples = sorted({
            Triple(int(h), int(r), int(t))
            for h, r, t in zip(rng.integers(0, 15, 100), rng.integers(0, 5, 100),
                               rng.integers(0, 15, 100))
        })
        expected = closure_by_repeated_scan(triples, SPORT_RULES)
        assert forward_closure(triples, SPORT_RULES).derived == expected


def test_closure_monotone_in_inputs():
    rng = substream(2, "mono")
    triples = sorted({Triple(int(h), int(r), int(t))
                      for h, r, t in zip(rng.integers(0, 8, 30), rng.integers(0, 5, 30),
                                         rng.integers(0, 8, 30))})
    small = forward_closure(triples[:10], SPORT_RULES).derived
    big = forward_closure(triples, SPORT_RULES).derived
    assert small <= big
    fewer_rules = forward_closure(triples, SPORT_RULES[:2]).derived
    assert fewer_rules <= big


def test_logical_hit1_containment():
    train = [Triple(0, 0, 1), Triple(2, 1, 3)]
    closure = forward_closure(train, ())
    assert logical_hit1(train, closure) == 1.0


def test_logical_hit1_empty_test_rejected():
    closure = forward_closure([Triple(0, 0, 1)], ())
    with pytest.raises(ValueError):
        logical_hit1([], closure)


def test_strip_paris_france_example():
    # capital-of fact makes the located-in fact redundant
    paris, france = 0, 1
    train = [Triple(paris, 0, france), Triple(paris, 1, france)]
    kept, removed = strip_redundant(train, LOCATION_RULES)
    assert removed == [Triple(paris, 1, france)]
    assert kept == [Triple(paris, 0, france)]


def test_strip_no_rules_is_noop():
    train = [Triple(0, 0, 1), Triple(1, 1, 2)]
    kept, removed = strip_redundant(train, ())
    assert kept == train and removed == []


def test_strip_mutual_inverse_pair_removes_exactly_one():
    x, y = 0, 1
    pair = [Triple(x, OHP, y), Triple(y, PBTO, x)]
    kept, removed = strip_redundant(pair, SPORT_RULES)
    assert len(kept) == 1 and len(removed) == 1
    # coverage: the closure of what is kept still contains both
    closure = forward_closure(kept, SPORT_RULES)
    assert set(pair) <= closure.derived
    # order flipped: still exactly one removed
    kept2, removed2 = strip_redundant(pair[::-1], SPORT_RULES)
    assert len(kept2) == 1 and len(removed2) == 1


def test_strip_idempotent(sport):
    kept, removed = strip_redundant(sport.store.train, sport.rules)
    kept2, removed2 = strip_redundant(kept, sport.rules)
    assert kept2 == kept and removed2 == []


def test_strip_coverage_on_fixture(sport):
    kept, removed = strip_redundant(sport.store.train, sport.rules)
    assert len(kept) + len(removed) == len(sport.store.train)
    closure = forward_closure(kept, sport.rules)
    assert set(sport.store.train) <= closure.derived


triple_ids = st.tuples(st.integers(0, 6), st.integers(0, 4), st.integers(0, 6))


@settings(max_examples=60, deadline=None)
@given(st.lists(triple_ids, min_size=0, max_size=40, unique=True))
def test_strip_coverage_property(raw):
    train = [Triple(*t) for t in raw]
    kept, removed = strip_redundant(train, SPORT_RULES)
    closure = forward_closure(kept, SPORT_RULES)
    assert set(train) <= closure.derived
    # idempotence: no kept triple is derivable from the other kept ones
    for i, triple in enumerate(kept):
        others = kept[:i] + kept[i + 1:]
        assert triple not in closure_by_repeated_scan(others, SPORT_RULES)
