"""Ranking-based evaluation: raw and filtered MRR and hit@k.

A test triple is ranked against all head-corruptions and all
tail-corruptions. The rank is 1 + the number of corruption candidates
scoring strictly higher than the true triple (optimistic tie handling;
an ``expected`` mode averages the optimistic and pessimistic ranks).
Filtered mode first removes candidates whose corrupted triple is known
(train, valid or test), never the test triple itself. Only entities are
corrupted. Ranks are invariant under the sigmoid, so ranking works on
pre-sigmoid scores.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .data import Triple
from .models import EmbeddingModel, ModelKind, effective_relation_matrices

HITS_AT = (1, 3, 10)


@dataclass(frozen=True)
class RankRecord:
    triple: Triple
    head_raw: float
    head_filtered: float
    tail_raw: float
    tail_filtered: float


@dataclass(frozen=True)
class EvalReport:
    mrr_raw: float
    mrr_filtered: float
    hits_raw: dict[int, float]
    hits_filtered: dict[int, float]
    ranks: tuple[RankRecord, ...]


class _Scorer:
    """Precomputed matrices for scoring all corruptions of one side."""

    def __init__(self, model: EmbeddingModel) -> None:
        self.kind = model.kind
        if model.kind is ModelKind.COMPLEX:
            self.eh, self.et = model.entity_head, model.entity_tail
            self.rf, self.rb = model.relation_fwd, model.relation_bwd
        else:
            self.eh = model.phi.apply(model.entity_head)
            self.et = model.phi.apply(model.entity_tail)
            self.rf, self.rb = effective_relation_matrices(model)

    def candidates(self, triple: Triple, side: str) -> np.ndarray:
        """Scores of the triple with `side` replaced by every entity."""
        h, r, t = triple
        if self.kind is ModelKind.COMPLEX:
            c, d = self.rf[r], self.rb[r]
            if side == "head":
                e, f = self.eh[t], self.et[t]
                return self.eh @ (c * e + d * f) + self.et @ (c * f - d * e)
            a, b = self.eh[h], self.et[h]
            return self.eh @ (a * c - b * d) + self.et @ (b * c + a * d)
        rf, rb = self.rf[r], self.rb[r]
        if side == "head":
            return 0.5 * (self.eh @ (rf * self.et[t]) + self.et @ (rb * self.eh[t]))
        return 0.5 * (self.et @ (rf * self.eh[h]) + self.eh @ (rb * self.et[h]))


class _KnownIndex:
    """Known corruptions per (relation, fixed entity), for filtered mode."""

    def __init__(self, known: Iterable[Triple]) -> None:
        self.heads_for: dict[tuple[int, int], list[int]] = defaultdict(list)
        self.tails_for: dict[tuple[int, int], list[int]] = defaultdict(list)
        for h, r, t in known:
            self.heads_for[(r, t)].append(h)
            self.tails_for[(h, r)].append(t)

    def known_entities(self, triple: Triple, side: str) -> list[int]:
        h, r, t = triple
        if side == "head":
            return self.heads_for.get((r, t), [])
        return self.tails_for.get((h, r), [])


def _rank_from_scores(
    scores: np.ndarray,
    true_entity: int,
    excluded: Sequence[int],
    tie_mode: str,
) -> float:
    """Rank of the true entity among non-excluded corruption candidates."""
    s0 = scores[true_entity]
    mask = np.ones(len(scores), dtype=bool)
    mask[true_entity] = False
    if len(excluded):
        mask[np.asarray(excluded, dtype=np.int64)] = False
    cand = scores[mask]
    greater = int(np.count_nonzero(cand > s0))
    if tie_mode == "optimistic":
        return float(1 + greater)
    if tie_mode == "expected":
        equal = int(np.count_nonzero(cand == s0))
        return 1 + greater + equal / 2.0
    raise ValueError(f"unknown tie mode {tie_mode!r}")


def rank_triple(
    model: EmbeddingModel,
    triple: Triple,
    side: str,
    filtered: bool,
    known: Iterable[Triple],
    tie_mode: str = "optimistic",
) -> float:
    """Rank of one triple against corruptions of one side (>= 1)."""
    if side not in ("head", "tail"):
        raise ValueError(f"side must be 'head' or 'tail', got {side!r}")
    scorer = _Scorer(model)
    scores = scorer.candidates(triple, side)
    true_entity = triple.head if side == "head" else triple.tail
    excluded: Sequence[int] = ()
    if filtered:
        index = _KnownIndex(known)
        excluded = [e for e in index.known_entities(triple, side) if e != true_entity]
    return _rank_from_scores(scores, true_entity, excluded, tie_mode)


def evaluate(
    model: EmbeddingModel,
    test: Sequence[Triple],
    known: Iterable[Triple],
    *,
    tie_mode: str = "optimistic",
    hits_at: Sequence[int] = HITS_AT,
) -> EvalReport:
    """Raw and filtered MRR / hit@k over head- and tail-corruption ranks.

    MRR averages 1/rank over the 2|test| rank observations; hit@k is the
    proportion of those observations with rank <= k.
    """
    if not test:
        raise ValueError("test split is empty")
    scorer = _Scorer(model)
    index = _KnownIndex(known)
    records = []
    for triple in test:
        per_side = {}
        for side in ("head", "tail"):
            scores = scorer.candidates(triple, side)
            true_entity = triple.head if side == "head" else triple.tail
            raw = _rank_from_scores(scores, true_entity, (), tie_mode)
            excluded = [e for e in index.known_entities(triple, side) if e != true_entity]
            filt = _rank_from_scores(scores, true_entity, excluded, tie_mode)
            per_side[side] = (raw, filt)
        records.append(
            RankRecord(
                triple,
                head_raw=per_side["head"][0],
                head_filtered=per_side["head"][1],
                tail_raw=per_side["tail"][0],
                tail_filtered=per_side["tail"][1],
            )
        )
    raw_ranks = np.array([[r.head_raw, r.tail_raw] for r in records]).ravel()
    filt_ranks = np.array([[r.head_filtered, r.tail_filtered] for r in records]).ravel()
    return EvalReport(
        mrr_raw=float(np.mean(1.0 / raw_ranks)),
        mrr_filtered=float(np.mean(1.0 / filt_ranks)),
        hits_raw={k: float(np.mean(raw_ranks <= k)) for k in hits_at},
        hits_filtered={k: float(np.mean(filt_ranks <= k)) for k in hits_at},
        ranks=tuple(records),
    )


def report_to_json(report: EvalReport) -> str:
    payload = {
        "mrr": {"raw": report.mrr_raw, "filtered": report.mrr_filtered},
        "hits_raw": {str(k): v for k, v in sorted(report.hits_raw.items())},
        "hits_filtered": {str(k): v for k, v in sorted(report.hits_filtered.items())},
        "n_test": len(report.ranks),
    }
    return json.dumps(payload, sort_keys=True, indent=2)


def format_report_table(report: EvalReport) -> str:
    """Aligned text table: MRR filter/raw plus filtered hit@k columns."""
    ks = sorted(report.hits_filtered)
    header = ["MRR(filter)", "MRR(raw)"] + [f"hit@{k}" for k in ks]
    values = [f"{report.mrr_filtered:.3f}", f"{report.mrr_raw:.3f}"] + [
        f"{report.hits_filtered[k]:.3f}" for k in ks
    ]
    widths = [max(len(h), len(v)) for h, v in zip(header, values)]
    line1 = "  ".join(h.rjust(w) for h, w in zip(header, widths))
    line2 = "  ".join(v.rjust(w) for v, w in zip(values, widths))
    return line1 + "\n" + line2 + "\n"


def write_ranks_csv(report: EvalReport, path: str | Path) -> None:
    """Per-triple rank dump: h,r,t,side,raw_rank,filtered_rank."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("h,r,t,side,raw_rank,filtered_rank\n")
        for rec in report.ranks:
            h, r, t = rec.triple
            fh.write(f"{h},{r},{t},head,{rec.head_raw!r},{rec.head_filtered!r}\n")
            fh.write(f"{h},{r},{t},tail,{rec.tail_raw!r},{rec.tail_filtered!r}\n")
