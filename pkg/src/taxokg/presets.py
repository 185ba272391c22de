"""Published default hyperparameters for the bundled benchmarks.

These are the fixed settings used by the acceptance suite and the
experiment drivers; every field can be overridden per run. Small sparse
sets (Sport, Location) share one preset; the WordNet-style benchmark
uses a wider embedding and a larger batch.
"""

from __future__ import annotations

SPORT = dict(
    dim=50,
    epochs=200,
    batch_size=32,
    neg_ratio=6,
    learning_rate=0.1,
    l2_lambda=0.003,
    optimizer="adagrad",
)

LOCATION = dict(SPORT)

WN18_SYNTH = dict(
    dim=100,
    epochs=200,
    batch_size=100,
    neg_ratio=6,
    learning_rate=0.1,
    l2_lambda=0.003,
    optimizer="adagrad",
)

BY_NAME = {"sport": SPORT, "location": LOCATION, "wn18_synth": WN18_SYNTH}
