"""Loading triple files, vocabularies, and dataset statistics.

The bundled fixtures follow the usual tab-separated benchmark layout:
one `head<TAB>relation<TAB>tail` per line, plus a rule file of
`premise<TAB>direct|inverse<TAB>conclusion` lines.
"""

from pathlib import Path

from taxokg import dataset_stats, load_dataset, subsample_train

DATA = Path(__file__).resolve().parent.parent / "data"

sport = load_dataset(
    DATA / "sport" / "train.tsv",
    DATA / "sport" / "test.tsv",
    rules_path=DATA / "sport" / "rules.tsv",
)

print("Sport dataset:", dataset_stats(sport))
print("relations:", sport.vocab.relation_names)
print()

# Rules name the taxonomy: a premise relation implies its conclusion,
# either directly (same entity order) or inverted.
for rule in sport.rules:
    p = sport.vocab.relation_name(rule.premise)
    c = sport.vocab.relation_name(rule.conclusion)
    rhs = f"(x,{c},y)" if rule.direction.value == "direct" else f"(y,{c},x)"
    print(f"  (x,{p},y) -> {rhs}")
print()

# Ids are dense and round-trip through the vocabulary.
triple = sport.store.train[0]
print("first train triple:", triple)
print("  decoded:", sport.vocab.entity_name(triple.head),
      sport.vocab.relation_name(triple.relation),
      sport.vocab.entity_name(triple.tail))
print()

# Training-set subsamples keep the full membership index, so filtered
# ranking later stays correct even on a 20% slice.
sub = subsample_train(sport.store, 0.2, seed=0)
print(f"20% subsample: {len(sub.train)} of {len(sport.store.train)} train triples,"
      f" membership index still covers {len(sub.known)} known triples")
