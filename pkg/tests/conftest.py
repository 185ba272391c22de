from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from taxokg.data import load_dataset
from taxokg.models import EmbeddingModel, ModelKind, Nonlinearity

REPO = Path(__file__).resolve().parent.parent
DATA = REPO / "data"


@pytest.fixture(scope="session")
def sport():
    return load_dataset(
        DATA / "sport" / "train.tsv",
        DATA / "sport" / "test.tsv",
        rules_path=DATA / "sport" / "rules.tsv",
    )


@pytest.fixture(scope="session")
def location():
    return load_dataset(
        DATA / "location" / "train.tsv",
        DATA / "location" / "test.tsv",
        rules_path=DATA / "location" / "rules.tsv",
    )


@pytest.fixture(scope="session")
def wn18_synth():
    return load_dataset(
        DATA / "wn18_synth" / "train.tsv",
        DATA / "wn18_synth" / "test.tsv",
        DATA / "wn18_synth" / "valid.tsv",
    )


def table_model(score_table: np.ndarray) -> EmbeddingModel:
    """SimplE model whose score for (h, 0, t) is exactly score_table[h, t].

    One relation; entity head rows select a block, tail rows select an
    offset inside the block, so the forward multilinear product reads a
    single controllable cell. Backward relation is zero.
    """
    n = score_table.shape[0]
    dim = n * n
    eh = np.zeros((n, dim))
    et = np.zeros((n, dim))
    for e in range(n):
        eh[e, e * n:(e + 1) * n] = 1.0
        et[e, e::n] = 1.0
    rf = 2.0 * score_table.reshape(-1)[None, :]
    return EmbeddingModel(
        kind=ModelKind.SIMPLE,
        dim=dim,
        phi=Nonlinearity.IDENTITY,
        entity_head=eh,
        entity_tail=et,
        relation_fwd=rf.copy(),
        relation_bwd=np.zeros((1, dim)),
        delta_fwd=np.zeros((0, dim)),
        delta_bwd=np.zeros((0, dim)),
    )
