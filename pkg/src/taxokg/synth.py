"""Deterministic generators for the bundled benchmark fixtures.

The original NELL-derived Sport/Location files and the WordNet subset are
not redistributable here, so the repository ships synthetic stand-ins
with the same entity/relation/triple counts, the same rule inventories,
and the same qualitative structure (specific facts entail general ones
via the rules; a large share of test pairs have no training evidence).
Every fixture is a pure function of its seed; ``write_dataset``
regenerates byte-identical files.

Person/city "classes" control what evidence the training split holds for
each test triple:

* derivable: the train split holds a premise fact for the same entity
  pair, so rule closure (and a constraint-respecting model) recovers the
  test fact;
* tied: the train split holds the *conclusion* fact, recoverable through
  the delta-tie but not through logical closure;
* hard: the test entity never appears in training.

The class counts below pin the logical-inference hit@1 at 88/307 for
Sport and 27/100 for Location.
"""

from __future__ import annotations

from pathlib import Path

from .rng import substream

SPORT_RELATIONS = (
    "AthleteLedSportsTeam",
    "AthletePlaysForTeam",
    "CoachesTeam",
    "OrganizationHiredPerson",
    "PersonBelongsToOrganization",
)

SPORT_RULES = (
    ("AthleteLedSportsTeam", "direct", "AthletePlaysForTeam"),
    ("AthletePlaysForTeam", "direct", "PersonBelongsToOrganization"),
    ("CoachesTeam", "direct", "PersonBelongsToOrganization"),
    ("OrganizationHiredPerson", "inverse", "PersonBelongsToOrganization"),
    ("PersonBelongsToOrganization", "inverse", "OrganizationHiredPerson"),
)

LOCATION_RULES = (
    ("CapitalCityOfCountry", "direct", "CityLocatedInCountry"),
    ("StateHasCapital", "inverse", "CityLocatedInState"),
)

WN_RELATIONS = (
    "_hypernym", "_hyponym",
    "_instance_hypernym", "_instance_hyponym",
    "_member_meronym", "_member_holonym",
    "_has_part", "_part_of",
    "_member_of_domain_topic", "_synset_domain_topic_of",
    "_member_of_domain_usage", "_synset_domain_usage_of",
    "_member_of_domain_region", "_synset_domain_region_of",
    "_also_see", "_similar_to", "_verb_group",
    "_derivationally_related_form",
)


def _line(h: str, r: str, t: str) -> str:
    return f"{h}\t{r}\t{t}\n"


def make_sport(seed: int = 0) -> dict[str, list[str]]:
    """Synthetic Sport fixture: 1039 entities, 5 relations, 1312/307 split."""
    rng = substream(seed, "sport")
    n_teams, n_athletes, n_coaches = 110, 820, 109
    teams = [f"team_{i:03d}" for i in range(n_teams)]
    athletes = [f"athlete_{i:04d}" for i in range(n_athletes)]
    coaches = [f"coach_{i:03d}" for i in range(n_coaches)]

    # (class name, athlete count, train relations, test relations)
    athlete_classes = [
        ("core", 104, ("APFT",), ()),
        ("core_red2", 257, ("APFT", "PBTO"), ()),          # PBTO redundant
        ("core_red3", 60, ("APFT", "PBTO", "OHP"), ()),    # PBTO+OHP redundant
        ("core_led", 150, ("ALST", "APFT"), ()),           # APFT redundant
        ("deriv_pbto", 25, ("APFT",), ("PBTO",)),
        ("deriv_ohp", 20, ("APFT",), ("OHP",)),
        ("deriv_both", 15, ("ALST",), ("PBTO", "OHP")),
        ("tied_apft", 40, ("PBTO",), ("APFT",)),
        ("tied_apft_ohp", 25, ("OHP",), ("APFT",)),
        ("hard_apft", 80, (), ("APFT",)),
        ("hard_pbto", 44, (), ("PBTO",)),
    ]
    coach_classes = [
        ("core", 66, ("CT",), ()),
        ("deriv", 13, ("CT",), ("PBTO",)),
        ("tied", 10, ("PBTO",), ("CT",)),
        ("hard", 20, (), ("CT",)),
    ]
    assert sum(c for _, c, _, _ in athlete_classes) == n_athletes
    assert sum(c for _, c, _, _ in coach_classes) == n_coaches

    rel = {
        "ALST": "AthleteLedSportsTeam",
        "APFT": "AthletePlaysForTeam",
        "CT": "CoachesTeam",
        "OHP": "OrganizationHiredPerson",
        "PBTO": "PersonBelongsToOrganization",
    }

    def rows(person: str, team: str, tags) -> list[str]:
        out = []
        for tag in tags:
            if tag == "OHP":
                out.append(_line(team, rel[tag], person))
            else:
                out.append(_line(person, rel[tag], team))
        return out

    persons = athletes + coaches
    order = rng.permutation(len(persons))
    team_of = {persons[p]: teams[i % n_teams] for i, p in enumerate(order)}

    train: list[str] = []
    test: list[str] = []
    a_iter = iter(athletes)
    for _, count, train_tags, test_tags in athlete_classes:
        for _ in range(count):
            a = next(a_iter)
            train += rows(a, team_of[a], train_tags)
            test += rows(a, team_of[a], test_tags)
    c_iter = iter(coaches)
    for _, count, train_tags, test_tags in coach_classes:
        for _ in range(count):
            c = next(c_iter)
            train += rows(c, team_of[c], train_tags)
            test += rows(c, team_of[c], test_tags)

    assert len(train) == 1312 and len(test) == 307
    train = [train[i] for i in rng.permutation(len(train))]
    test = [test[i] for i in rng.permutation(len(test))]
    rules = [_line(p, d, c) for p, d, c in SPORT_RULES]
    return {"train": train, "test": test, "rules": rules}


def make_location(seed: int = 0) -> dict[str, list[str]]:
    """Synthetic Location fixture: 445 entities, 5 relations, 384/100 split."""
    rng = substream(seed, "location")
    n_countries, n_states, n_cities = 20, 75, 350
    countries = [f"country_{i:02d}" for i in range(n_countries)]
    states = [f"state_{i:02d}" for i in range(n_states)]
    cities = [f"city_{i:03d}" for i in range(n_cities)]

    country_of_state = {s: countries[i % n_countries] for i, s in enumerate(states)}
    order = rng.permutation(n_cities)
    state_of_city = {cities[c]: states[i % n_states] for i, c in enumerate(order)}

    def country_of(city: str) -> str:
        return country_of_state[state_of_city[city]]

    # (class, count, train row tags, test row tags); SHC rows belong to the
    # city's state but are listed under the capital city's class.
    city_classes = [
        ("plain_state", 152, ("CLIS",), ()),
        ("plain_country", 90, ("CLIC",), ()),
        ("plain_both", 4, ("CLIS", "CLIC"), ()),
        ("cap_deriv", 15, ("SHC",), ("CLIS",)),          # test CLIS derivable
        ("cap_tied", 10, ("CLIS",), ("SHC",)),           # test SHC via tie only
        ("cap_red", 4, ("SHC", "CLIS"), ()),             # CLIS redundant
        ("cap_country_deriv", 12, ("CCOC",), ("CLIC",)),  # test CLIC derivable
        ("city_tied", 10, ("CLIC",), ("CCOC",)),
        ("city_cluster", 4, ("CLIS",), ("CLIC",)),
        ("hard_state", 24, (), ("CLIS",)),
        ("hard_country", 25, (), ("CLIC",)),
    ]
    assert sum(c for _, c, _, _ in city_classes) == n_cities

    def rows(city: str, tags) -> list[str]:
        s, f = state_of_city[city], country_of(city)
        out = []
        for tag in tags:
            if tag == "CLIS":
                out.append(_line(city, "CityLocatedInState", s))
            elif tag == "CLIC":
                out.append(_line(city, "CityLocatedInCountry", f))
            elif tag == "SHC":
                out.append(_line(s, "StateHasCapital", city))
            elif tag == "CCOC":
                out.append(_line(city, "CapitalCityOfCountry", f))
        return out

    # capitals need distinct states so a state never has two SHC rows
    special_state_classes = ("cap_deriv", "cap_tied", "cap_red")
    state_pool = iter(states)

    train: list[str] = [
        _line(s, "StateLocatedInCountry", country_of_state[s]) for s in states
    ]
    test: list[str] = []
    c_iter = iter(cities)
    for name, count, train_tags, test_tags in city_classes:
        for _ in range(count):
            city = next(c_iter)
            if name in special_state_classes:
                state_of_city[city] = next(state_pool)
            train += rows(city, train_tags)
            test += rows(city, test_tags)

    assert len(train) == 384 and len(test) == 100, (len(train), len(test))
    train = [train[i] for i in rng.permutation(len(train))]
    test = [test[i] for i in rng.permutation(len(test))]
    rules = [_line(p, d, c) for p, d, c in LOCATION_RULES]
    return {"train": train, "test": test, "rules": rules}


def make_wn18_synth(seed: int = 0) -> dict[str, list[str]]:
    """WordNet-style synthetic benchmark with the WN18 relation inventory.

    A hierarchy plus paired/symmetric lexical relations, all stored in
    both directions the way the original benchmark stores them. About
    11k triples over 500 entities, split ~9.8k/600/600.
    """
    rng = substream(seed, "wn18-synth")
    n = 500
    ent = [f"n{i:08d}" for i in range(n)]
    rows: list[str] = []
    seen: set[tuple[str, str, str]] = set()

    def add(h: str, r: str, t: str) -> None:
        key = (h, r, t)
        if h != t and key not in seen:
            seen.add(key)
            rows.append(_line(h, r, t))

    # hierarchy: each non-root entity gets a parent among earlier entities
    parent = {}
    for i in range(1, n):
        parent[i] = int(rng.integers(0, max(1, i // 2)))  # shallow, bushy tree
        add(ent[i], "_hypernym", ent[parent[i]])
        add(ent[parent[i]], "_hyponym", ent[i])

    def random_pairs(count: int):
        a = rng.integers(0, n, size=count)
        b = rng.integers(0, n, size=count)
        return zip(a.tolist(), b.tolist())

    for i, j in random_pairs(300):
        add(ent[i], "_instance_hypernym", ent[j])
        add(ent[j], "_instance_hyponym", ent[i])
    for i, j in random_pairs(700):
        add(ent[i], "_member_meronym", ent[j])
        add(ent[j], "_member_holonym", ent[i])
    for i, j in random_pairs(700):
        add(ent[i], "_has_part", ent[j])
        add(ent[j], "_part_of", ent[i])

    # domain relations: a handful of hub entities
    hubs = rng.choice(n, size=12, replace=False)
    members = rng.choice(n, size=400, replace=False)
    for k, m in enumerate(members.tolist()):
        hub = ent[int(hubs[k % len(hubs)])]
        add(ent[m], "_member_of_domain_topic", hub)
        add(hub, "_synset_domain_topic_of", ent[m])
    for i, j in random_pairs(100):
        add(ent[i], "_member_of_domain_usage", ent[j])
        add(ent[j], "_synset_domain_usage_of", ent[i])
    for i, j in random_pairs(100):
        add(ent[i], "_member_of_domain_region", ent[j])
        add(ent[j], "_synset_domain_region_of", ent[i])

    # symmetric relations, stored in both orders
    for name, count in (
        ("_also_see", 400),
        ("_similar_to", 300),
        ("_verb_group", 150),
        ("_derivationally_related_form", 1800),
    ):
        for i, j in random_pairs(count):
            add(ent[i], name, ent[j])
            add(ent[j], name, ent[i])

    order = rng.permutation(len(rows))
    rows = [rows[i] for i in order]
    valid, test, train = rows[:600], rows[600:1200], rows[1200:]
    return {"train": train, "valid": valid, "test": test}


def write_dataset(files: dict[str, list[str]], out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, lines in files.items():
        (out / f"{name}.tsv").write_text("".join(lines), encoding="utf-8")
