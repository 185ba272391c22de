"""Mini-batch contrastive training with regularized negative log-likelihood.

Positives come from the train split; negatives corrupt the head or tail
(fair coin) with a uniformly random entity, re-drawing a bounded number
of times if the corruption collides with its source triple. The loss is

    sum_{y=+1} -log mu + sum_{y=-1} -log(1 - mu) + lambda * sum ||row||^2

over the raw parameter rows touched by the batch, with mu clamped to
[eps, 1-eps] before the log. Gradients flow through the entity
nonlinearity and through delta-tied relation chains, so an update to a
constrained premise trains its conclusion's parameters and its own raw
delta. Everything is deterministic under (config, seed).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .data import Direction, Triple, TripleStore
from .models import EmbeddingModel, ModelKind, effective_relation_matrices, sigmoid
from .rng import substream

LOG_EPS = 1e-12          # probability clamp before taking logs
_MAX_CORRUPTION_RETRIES = 100


class TrainingError(RuntimeError):
    """Training aborted (non-finite loss)."""


@dataclass
class TrainConfig:
    epochs: int = 100
    batch_size: int = 32
    neg_ratio: int = 1
    learning_rate: float = 0.1
    l2_lambda: float = 0.03
    optimizer: str = "adagrad"  # or "sgd"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1 or self.neg_ratio < 1:
            raise ValueError("batch_size and neg_ratio must be >= 1")
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be > 0")
        if self.l2_lambda < 0.0:
            raise ValueError("l2_lambda must be >= 0")
        if self.optimizer not in ("adagrad", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass
class LossTrace:
    """Per-epoch (epoch index, mean training loss) pairs."""

    entries: list[tuple[int, float]] = field(default_factory=list)

    def losses(self) -> list[float]:
        return [loss for _, loss in self.entries]

    def write_csv(self, path: str | Path, header: bool = True) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            if header:
                fh.write("epoch,loss\n")
            for epoch, loss in self.entries:
                fh.write(f"{epoch},{loss!r}\n")


@dataclass
class LabeledBatch:
    heads: np.ndarray
    relations: np.ndarray
    tails: np.ndarray
    labels: np.ndarray  # +1.0 positives, -1.0 corruptions

    def __len__(self) -> int:
        return len(self.labels)


def negative_batch(
    positives: Sequence[Triple],
    neg_ratio: int,
    n_entities: int,
    rng: np.random.Generator,
) -> LabeledBatch:
    """Positives followed by neg_ratio corruptions per positive.

    Each corruption replaces the head or the tail (fair coin) with a
    uniform random entity; a corruption identical to its source triple is
    re-drawn up to a bounded retry budget, then kept (still labeled -1).
    """
    if neg_ratio < 1:
        raise ValueError("neg_ratio must be >= 1")
    if not positives:
        empty = np.empty(0, dtype=np.int64)
        return LabeledBatch(empty, empty.copy(), empty.copy(), np.empty(0))
    pos = np.asarray(positives, dtype=np.int64)
    n = len(pos) * neg_ratio
    heads = np.repeat(pos[:, 0], neg_ratio)
    rels = np.repeat(pos[:, 1], neg_ratio)
    tails = np.repeat(pos[:, 2], neg_ratio)
    corrupt_head = rng.integers(0, 2, size=n).astype(bool)
    original = np.where(corrupt_head, heads, tails)
    replacement = rng.integers(0, n_entities, size=n)
    for _ in range(_MAX_CORRUPTION_RETRIES):
        clash = replacement == original
        if not clash.any():
            break
        replacement[clash] = rng.integers(0, n_entities, size=int(clash.sum()))
    neg_heads = np.where(corrupt_head, replacement, heads)
    neg_tails = np.where(corrupt_head, tails, replacement)
    return LabeledBatch(
        np.concatenate([pos[:, 0], neg_heads]),
        np.concatenate([pos[:, 1], rels]),
        np.concatenate([pos[:, 2], neg_tails]),
        np.concatenate([np.ones(len(pos)), -np.ones(n)]),
    )


def _aggregate_rows(ids: np.ndarray, rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sum gradient rows that share an index; returns (unique ids, summed rows)."""
    uniq, inverse = np.unique(ids, return_inverse=True)
    out = np.zeros((len(uniq), rows.shape[1]))
    np.add.at(out, inverse, rows)
    return uniq, out


def batch_loss(
    model: EmbeddingModel, batch: LabeledBatch, l2_lambda: float
) -> tuple[float, dict[str, tuple[np.ndarray, np.ndarray]]]:
    """Total batch loss and sparse gradients for every touched raw row.

    The gradient dict maps parameter-array name to (unique row indices,
    gradient rows). L2 regularization covers each touched raw row once
    per batch: both role rows of every batch entity, the raw rows of the
    free relations the batch's relations resolve to, and the raw deltas
    along their chains.
    """
    if len(batch) == 0:
        raise ValueError("batch must be non-empty")
    heads, rels, tails, labels = batch.heads, batch.relations, batch.tails, batch.labels

    if model.kind is ModelKind.COMPLEX:
        a, b = model.entity_head[heads], model.entity_tail[heads]
        c, d = model.relation_fwd[rels], model.relation_bwd[rels]
        e, f = model.entity_head[tails], model.entity_tail[tails]
        scores = np.sum(a * c * e + b * c * f + a * d * f - b * d * e, axis=1)
    else:
        rf_all, rb_all = effective_relation_matrices(model)
        raw_hh, raw_tt = model.entity_head[heads], model.entity_tail[tails]
        raw_th, raw_ht = model.entity_head[tails], model.entity_tail[heads]
        hh, tt = model.phi.apply(raw_hh), model.phi.apply(raw_tt)
        th, ht = model.phi.apply(raw_th), model.phi.apply(raw_ht)
        rf, rb = rf_all[rels], rb_all[rels]
        scores = 0.5 * (np.sum(hh * rf * tt, axis=1) + np.sum(th * rb * ht, axis=1))

    ys = labels * scores
    losses = np.logaddexp(0.0, -ys)           # -log sigmoid(y * score)
    losses = np.minimum(losses, -np.log(LOG_EPS))  # == clamping mu to [eps, 1-eps]
    loss = float(np.sum(losses))
    dscore = sigmoid(scores) - (labels + 1.0) / 2.0  # dloss/dscore per example

    grads: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    g = dscore[:, None]

    if model.kind is ModelKind.COMPLEX:
        d_a = g * (c * e + d * f)
        d_b = g * (c * f - d * e)
        d_c = g * (a * e + b * f)
        d_d = g * (a * f - b * e)
        d_e = g * (a * c - b * d)
        d_f = g * (b * c + a * d)
        eh_ids, eh_rows = _aggregate_rows(
            np.concatenate([heads, tails]), np.concatenate([d_a, d_e])
        )
        et_ids, et_rows = _aggregate_rows(
            np.concatenate([heads, tails]), np.concatenate([d_b, d_f])
        )
        rf_ids, rf_rows = _aggregate_rows(rels, d_c)
        rb_ids, rb_rows = _aggregate_rows(rels, d_d)
        grads["entity_head"] = (eh_ids, eh_rows)
        grads["entity_tail"] = (et_ids, et_rows)
        grads["relation_fwd"] = (rf_ids, rf_rows)
        grads["relation_bwd"] = (rb_ids, rb_rows)
        _apply_l2(model, grads, l2_lambda, eh_ids, rf_ids, rb_ids, (), ())
        reg = _l2_value(model, l2_lambda, eh_ids, rf_ids, rb_ids, (), ())
        return loss + reg, grads

    # SimplE / SimplE+: chain rule through phi, then through relation ties.
    d_hh = 0.5 * g * rf * tt * model.phi.derivative(raw_hh)
    d_tt = 0.5 * g * rf * hh * model.phi.derivative(raw_tt)
    d_th = 0.5 * g * rb * ht * model.phi.derivative(raw_th)
    d_ht = 0.5 * g * rb * th * model.phi.derivative(raw_ht)
    eh_ids, eh_rows = _aggregate_rows(
        np.concatenate([heads, tails]), np.concatenate([d_hh, d_th])
    )
    et_ids, et_rows = _aggregate_rows(
        np.concatenate([tails, heads]), np.concatenate([d_tt, d_ht])
    )
    grads["entity_head"] = (eh_ids, eh_rows)
    grads["entity_tail"] = (et_ids, et_rows)

    eff_ids, eff_fwd_rows = _aggregate_rows(rels, 0.5 * g * hh * tt)
    _, eff_bwd_rows = _aggregate_rows(rels, 0.5 * g * th * ht)

    raw_fwd: dict[int, np.ndarray] = {}
    raw_bwd: dict[int, np.ndarray] = {}
    d_delta_fwd: dict[int, np.ndarray] = {}
    d_delta_bwd: dict[int, np.ndarray] = {}
    touched_deltas: set[int] = set()
    touched_roots: set[int] = set()
    for i, rid in enumerate(eff_ids):
        gf, gb = eff_fwd_rows[i], eff_bwd_rows[i]
        cur = int(rid)
        while True:
            tie = model.ties.get(cur)
            if tie is None:
                raw_fwd[cur] = raw_fwd.get(cur, 0.0) + gf
                raw_bwd[cur] = raw_bwd.get(cur, 0.0) + gb
                touched_roots.add(cur)
                break
            if tie.conclusion == cur:  # symmetric: both halves share the fwd row
                raw_fwd[cur] = raw_fwd.get(cur, 0.0) + gf + gb
                touched_roots.add(cur)
                break
            if tie.delta_row is not None:
                row = tie.delta_row
                mask_f = (model.delta_fwd[row] > 0.0).astype(float)
                mask_b = (model.delta_bwd[row] > 0.0).astype(float)
                d_delta_fwd[row] = d_delta_fwd.get(row, 0.0) - gf * mask_f
                d_delta_bwd[row] = d_delta_bwd.get(row, 0.0) - gb * mask_b
                touched_deltas.add(row)
            if tie.direction is Direction.INVERSE:
                gf, gb = gb, gf
            cur = tie.conclusion

    def _pack(d: dict[int, np.ndarray], width: int) -> tuple[np.ndarray, np.ndarray]:
        if not d:
            return np.empty(0, dtype=np.int64), np.empty((0, width))
        ids = np.array(sorted(d), dtype=np.int64)
        return ids, np.stack([d[int(i)] for i in ids])

    grads["relation_fwd"] = _pack(raw_fwd, model.dim)
    grads["relation_bwd"] = _pack(raw_bwd, model.dim)
    grads["delta_fwd"] = _pack(d_delta_fwd, model.dim)
    grads["delta_bwd"] = _pack(d_delta_bwd, model.dim)

    root_ids = np.array(sorted(touched_roots), dtype=np.int64)
    delta_ids = np.array(sorted(touched_deltas), dtype=np.int64)
    _apply_l2(model, grads, l2_lambda, eh_ids, root_ids, root_ids, delta_ids, delta_ids)
    reg = _l2_value(model, l2_lambda, eh_ids, root_ids, root_ids, delta_ids, delta_ids)
    return loss + reg, grads


def _l2_value(model, lam, entity_ids, rf_ids, rb_ids, df_ids, db_ids) -> float:
    if lam == 0.0:
        return 0.0
    total = np.sum(model.entity_head[entity_ids] ** 2)
    total += np.sum(model.entity_tail[entity_ids] ** 2)
    total += np.sum(model.relation_fwd[rf_ids] ** 2) if len(rf_ids) else 0.0
    total += np.sum(model.relation_bwd[rb_ids] ** 2) if len(rb_ids) else 0.0
    total += np.sum(model.delta_fwd[df_ids] ** 2) if len(df_ids) else 0.0
    total += np.sum(model.delta_bwd[db_ids] ** 2) if len(db_ids) else 0.0
    return float(lam * total)


def _apply_l2(model, grads, lam, entity_ids, rf_ids, rb_ids, df_ids, db_ids) -> None:
    """Add 2*lambda*row to the gradient of every touched raw row, in place."""
    if lam == 0.0:
        return

    def _merge(name: str, arr: np.ndarray, ids: np.ndarray) -> None:
        if len(ids) == 0:
            return
        old_ids, old_rows = grads.get(
            name, (np.empty(0, dtype=np.int64), np.empty((0, model.dim)))
        )
        all_ids = np.union1d(old_ids, ids)
        rows = np.zeros((len(all_ids), model.dim))
        if len(old_ids):
            rows[np.searchsorted(all_ids, old_ids)] += old_rows
        rows[np.searchsorted(all_ids, ids)] += 2.0 * lam * arr[ids]
        grads[name] = (all_ids, rows)

    _merge("entity_head", model.entity_head, entity_ids)
    _merge("entity_tail", model.entity_tail, entity_ids)
    _merge("relation_fwd", model.relation_fwd, np.asarray(rf_ids, dtype=np.int64))
    _merge("relation_bwd", model.relation_bwd, np.asarray(rb_ids, dtype=np.int64))
    _merge("delta_fwd", model.delta_fwd, np.asarray(df_ids, dtype=np.int64))
    _merge("delta_bwd", model.delta_bwd, np.asarray(db_ids, dtype=np.int64))


class _Sgd:
    def __init__(self, model: EmbeddingModel, lr: float) -> None:
        self.lr = lr

    def step(self, model: EmbeddingModel, grads) -> None:
        params = model.parameter_arrays()
        for name, (ids, rows) in grads.items():
            if len(ids):
                params[name][ids] -= self.lr * rows


class _Adagrad:
    """Per-parameter adaptive learning rates from accumulated squared gradients."""

    def __init__(self, model: EmbeddingModel, lr: float) -> None:
        self.lr = lr
        self.acc = {name: np.zeros_like(arr) for name, arr in model.parameter_arrays().items()}

    def step(self, model: EmbeddingModel, grads) -> None:
        params = model.parameter_arrays()
        for name, (ids, rows) in grads.items():
            if not len(ids):
                continue
            acc = self.acc[name]
            acc[ids] += rows * rows
            params[name][ids] -= self.lr * rows / (np.sqrt(acc[ids]) + 1e-8)


def train(
    model: EmbeddingModel,
    store: TripleStore,
    config: TrainConfig,
    *,
    debug_checks: bool = False,
) -> LossTrace:
    """Train in place; returns the per-epoch mean-loss trace.

    Negatives are sampled fresh each epoch. With ``debug_checks`` the
    direct-rule inequality (effective premise <= effective conclusion,
    element-wise) is asserted after every update.
    """
    if len(store.train) == 0:
        raise ValueError("train split is empty")
    max_eid = max(max(h, t) for h, _, t in store.train)
    max_rid = max(r for _, r, _ in store.train)
    if max_eid >= model.n_entities or max_rid >= model.n_relations:
        raise ValueError("model vocab sizes do not match the store")

    rng_shuffle = substream(config.seed, "shuffle")
    rng_neg = substream(config.seed, "negatives")
    optimizer = (
        _Adagrad(model, config.learning_rate)
        if config.optimizer == "adagrad"
        else _Sgd(model, config.learning_rate)
    )
    train_arr = list(store.train)
    trace = LossTrace()
    for epoch in range(config.epochs):
        order = rng_shuffle.permutation(len(train_arr))
        total_loss = 0.0
        total_examples = 0
        for start in range(0, len(train_arr), config.batch_size):
            batch_idx = order[start:start + config.batch_size]
            positives = [train_arr[i] for i in batch_idx]
            batch = negative_batch(positives, config.neg_ratio, model.n_entities, rng_neg)
            loss, grads = batch_loss(model, batch, config.l2_lambda)
            if not np.isfinite(loss):
                raise TrainingError(
                    f"non-finite loss at epoch {epoch}, batch {start // config.batch_size}"
                )
            optimizer.step(model, grads)
            total_loss += loss
            total_examples += len(batch)
            if debug_checks:
                _assert_direct_rule_inequality(model)
        trace.entries.append((epoch, total_loss / total_examples))
    return trace


def _assert_direct_rule_inequality(model: EmbeddingModel) -> None:
    from .models import effective_relation

    for rule in model.rules:
        if rule.direction is not Direction.DIRECT:
            continue
        pf, pb = effective_relation(model, rule.premise)
        cf, cb = effective_relation(model, rule.conclusion)
        if not (np.all(pf <= cf + 1e-9) and np.all(pb <= cb + 1e-9)):
            raise AssertionError(
                f"direct rule {rule.premise}->{rule.conclusion} inequality violated"
            )
