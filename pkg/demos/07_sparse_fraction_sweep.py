"""Sparse-data sweep: hit@1 as the available training data shrinks.

Trains on 20%/50%/100% slices of the Sport training set and evaluates
hit@1 on the full test set, for the two factorization models plus the
pure-inference baseline. With little data, logical inference competes
with plain SimplE; the constrained model dominates both at every
fraction because it combines generalization with the rules. Takes ~1 min
(single seed; the acceptance suite does the 3-seed median version).
"""

from pathlib import Path

from taxokg import (
    ModelKind,
    TrainConfig,
    evaluate,
    forward_closure,
    init_params,
    load_dataset,
    logical_hit1,
    subsample_train,
    train,
)
from taxokg import presets

DATA = Path(__file__).resolve().parent.parent / "data"

sport = load_dataset(
    DATA / "sport" / "train.tsv",
    DATA / "sport" / "test.tsv",
    rules_path=DATA / "sport" / "rules.tsv",
)
preset = presets.SPORT

print("fraction  SimplE+  SimplE   logical")
for fraction in (0.2, 0.5, 1.0):
    sub = subsample_train(sport.store, fraction, seed=0)
    row = {}
    row["logical"] = logical_hit1(sub.test, forward_closure(sub.train, sport.rules))
    for method, kind, rules in (
        ("plus", ModelKind.SIMPLE_PLUS, sport.rules),
        ("simple", ModelKind.SIMPLE, ()),
    ):
        model = init_params(
            kind, sport.vocab.n_entities, sport.vocab.n_relations, preset["dim"],
            rules=rules, relation_names=sport.vocab.relation_names, seed=0,
        )
        config = TrainConfig(
            epochs=preset["epochs"], batch_size=preset["batch_size"],
            neg_ratio=preset["neg_ratio"], learning_rate=preset["learning_rate"],
            l2_lambda=preset["l2_lambda"], optimizer=preset["optimizer"], seed=0,
        )
        train(model, sub, config)
        row[method] = evaluate(model, sub.test, sub.known).hits_filtered[1]
    print(f"  {fraction:<7} {row['plus']:.3f}    {row['simple']:.3f}    "
          f"{row['logical']:.3f}")
