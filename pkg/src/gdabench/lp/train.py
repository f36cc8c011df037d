"""Mini-batch training of the embedding models with negative sampling.

Loss per training pair (one positive triple, one corruption):

* margin models (transe/transd/transh/hole):
  ``max(0, margin - s(pos) + s(neg))`` on the uniform higher-is-better score;
* logistic models (distmult/complex):
  ``softplus(-s(pos)) + softplus(s(neg)) + lambda * sum ||v||^2`` over every
  parameter vector the two triples touch (a vector shared by both triples
  counts once per occurrence).

Gradients are analytic and exposed through :func:`pair_losses_and_grads` so
they can be checked against finite differences independently of the loop.
Single-worker training is bit-deterministic under the config seed; more
workers update shared parameters without locks and give up determinism.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import TrainingError
from ..kg import KnowledgeGraph
from ..util import run_sharded, sigmoid, softplus
from .config import LOGISTIC_KINDS, MARGIN_KINDS, ModelConfig, ModelKind
from .models import (
    EmbeddingModel,
    _transd_project,
    _transh_project,
    circular_convolution,
    circular_correlation,
    init_model,
)

# gradient contribution: parameter name, touched rows (B,), per-row grads (B, d)
GradContrib = tuple[str, np.ndarray, np.ndarray]


def _score_and_grads(
    model: EmbeddingModel, triples: np.ndarray, norm: str
) -> tuple[np.ndarray, list[GradContrib]]:
    """Batched scores plus d(score)/d(param-row) for every touched row."""
    heads, rels, tails = triples[:, 0], triples[:, 1], triples[:, 2]
    h = model.entities[heads]
    r = model.relations[rels]
    t = model.entities[tails]
    kind = model.kind
    if kind is ModelKind.TRANSE:
        diff = h + r - t
        if norm == "l1":
            s = -np.sum(np.abs(diff), axis=-1)
            g = -np.sign(diff)
        else:
            dist = np.sqrt(np.maximum(np.sum(diff * diff, axis=-1), 1e-300))
            s = -dist
            g = -diff / dist[:, None]
        return s, [("entities", heads, g), ("relations", rels, g), ("entities", tails, -g)]
    if kind is ModelKind.TRANSD:
        hp = model.aux["ent_proj"][heads]
        tp = model.aux["ent_proj"][tails]
        rp = model.aux["rel_proj"][rels]
        x = _transd_project(h, hp, rp) + r - _transd_project(t, tp, rp)
        s = -np.sum(x * x, axis=-1)
        xr = np.sum(x * rp, axis=-1, keepdims=True)
        grads = [
            ("entities", heads, -2.0 * (x + xr * hp)),
            ("entities", tails, 2.0 * (x + xr * tp)),
            ("relations", rels, -2.0 * x),
            ("ent_proj", heads, -2.0 * xr * h),
            ("ent_proj", tails, 2.0 * xr * t),
            (
                "rel_proj",
                rels,
                -2.0
                * (np.sum(hp * h, axis=-1, keepdims=True) - np.sum(tp * t, axis=-1, keepdims=True))
                * x,
            ),
        ]
        return s, grads
    if kind is ModelKind.TRANSH:
        w = model.aux["normals"][rels]
        u = h - t
        x = _transh_project(h, w) + r - _transh_project(t, w)
        s = -np.sum(x * x, axis=-1)
        xw = np.sum(x * w, axis=-1, keepdims=True)
        uw = np.sum(u * w, axis=-1, keepdims=True)
        g_ent = -2.0 * (x - xw * w)
        grads = [
            ("entities", heads, g_ent),
            ("entities", tails, -g_ent),
            ("relations", rels, -2.0 * x),
            ("normals", rels, 2.0 * (xw * u + uw * x)),
        ]
        return s, grads
    if kind is ModelKind.DISTMULT:
        s = np.sum(h * r * t, axis=-1)
        return s, [("entities", heads, r * t), ("relations", rels, h * t), ("entities", tails, h * r)]
    if kind is ModelKind.HOLE:
        s = np.sum(r * circular_correlation(h, t), axis=-1)
        grads = [
            ("entities", heads, circular_correlation(r, t)),
            ("relations", rels, circular_correlation(h, t)),
            ("entities", tails, circular_convolution(r, h)),
        ]
        return s, grads
    if kind is ModelKind.COMPLEX:
        hi = model.aux["ent_im"][heads]
        ti = model.aux["ent_im"][tails]
        ri = model.aux["rel_im"][rels]
        s = np.sum(h * r * t + hi * r * ti + h * ri * ti - hi * ri * t, axis=-1)
        grads = [
            ("entities", heads, r * t + ri * ti),
            ("ent_im", heads, r * ti - ri * t),
            ("relations", rels, h * t + hi * ti),
            ("rel_im", rels, h * ti - hi * t),
            ("entities", tails, h * r - hi * ri),
            ("ent_im", tails, hi * r + h * ri),
        ]
        return s, grads
    raise ValueError(f"unknown model kind {kind!r}")


def _involved_vectors(model: EmbeddingModel, triples: np.ndarray) -> list[tuple[str, np.ndarray]]:
    """Parameter rows whose squared norm enters the logistic regularizer."""
    heads, rels, tails = triples[:, 0], triples[:, 1], triples[:, 2]
    rows = [("entities", heads), ("relations", rels), ("entities", tails)]
    if model.kind is ModelKind.COMPLEX:
        rows += [("ent_im", heads), ("rel_im", rels), ("ent_im", tails)]
    return rows


def pair_losses_and_grads(
    model: EmbeddingModel, config: ModelConfig, pos: np.ndarray, neg: np.ndarray
) -> tuple[np.ndarray, list[GradContrib]]:
    """Per-pair losses and gradient contributions for aligned (B,3) batches."""
    s_pos, g_pos = _score_and_grads(model, pos, config.norm)
    s_neg, g_neg = _score_and_grads(model, neg, config.norm)
    contribs: list[GradContrib] = []
    if config.kind in MARGIN_KINDS:
        raw = config.margin - s_pos + s_neg
        losses = np.maximum(raw, 0.0)
        active = (raw > 0.0).astype(float)
        coef_pos, coef_neg = -active, active
    else:
        losses = softplus(-s_pos) + softplus(s_neg)
        coef_pos = -sigmoid(-s_pos)
        coef_neg = sigmoid(s_neg)
        lam = config.l2_lambda
        for triples in (pos, neg):
            for name, rows in _involved_vectors(model, triples):
                vecs = model.all_params()[name][rows]
                losses = losses + lam * np.sum(vecs * vecs, axis=-1)
                contribs.append((name, rows, 2.0 * lam * vecs))
    for name, rows, g in g_pos:
        contribs.append((name, rows, coef_pos[:, None] * g))
    for name, rows, g in g_neg:
        contribs.append((name, rows, coef_neg[:, None] * g))
    return losses, contribs


def accumulate_grads(contribs: list[GradContrib], scale: float) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Merge contributions into one (rows, summed grads) pair per parameter."""
    by_name: dict[str, tuple[list[np.ndarray], list[np.ndarray]]] = {}
    for name, rows, g in contribs:
        slot = by_name.setdefault(name, ([], []))
        slot[0].append(rows)
        slot[1].append(g)
    merged: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    for name, (row_parts, grad_parts) in by_name.items():
        rows = np.concatenate(row_parts)
        grads = np.concatenate(grad_parts) * scale
        uniq, inv = np.unique(rows, return_inverse=True)
        acc = np.zeros((len(uniq), grads.shape[1]))
        np.add.at(acc, inv, grads)
        merged[name] = (uniq, acc)
    return merged


class _Optimizer:
    def __init__(self, model: EmbeddingModel, config: ModelConfig) -> None:
        self.params = model.all_params()
        self.alpha = config.alpha
        self.adagrad = config.optimizer == "adagrad"
        if self.adagrad:
            self.accum = {k: np.zeros_like(v) for k, v in self.params.items()}

    def step(self, merged: dict[str, tuple[np.ndarray, np.ndarray]]) -> None:
        for name, (rows, g) in merged.items():
            if self.adagrad:
                self.accum[name][rows] += g * g
                self.params[name][rows] -= self.alpha * g / (np.sqrt(self.accum[name][rows]) + 1e-10)
            else:
                self.params[name][rows] -= self.alpha * g


class NegativeSampler:
    """Filtered corruption of positive triples, uniform or bernoulli-sided."""

    def __init__(self, kg: KnowledgeGraph, config: ModelConfig) -> None:
        self.n_ent = kg.num_entities
        self.n_rel = kg.num_relations
        n = max(self.n_ent, self.n_rel)
        self._code = np.array([n * n, n, 1], dtype=np.int64)
        triples = np.asarray(kg.triples, dtype=np.int64)
        self.known = set((triples @ self._code).tolist()) if len(triples) else set()
        self.head_prob = self._bernoulli_head_prob(triples) if config.bern else None

    def _bernoulli_head_prob(self, triples: np.ndarray) -> np.ndarray:
        """P(corrupt head) = tph / (tph + hpt) per relation, 0.5 when unseen."""
        prob = np.full(self.n_rel, 0.5)
        for rid in np.unique(triples[:, 1]) if len(triples) else []:
            sub = triples[triples[:, 1] == rid]
            tails_per_head = len(sub) / len(np.unique(sub[:, 0]))
            heads_per_tail = len(sub) / len(np.unique(sub[:, 2]))
            prob[rid] = tails_per_head / (tails_per_head + heads_per_tail)
        return prob

    def _is_known(self, triples: np.ndarray) -> np.ndarray:
        codes = triples @ self._code
        return np.fromiter((c in self.known for c in codes.tolist()), dtype=bool, count=len(codes))

    def corrupt_entities(self, batch: np.ndarray, rate: int, rng: np.random.Generator) -> np.ndarray:
        """`rate` filtered corruptions per positive; head or tail replaced."""
        neg = np.repeat(batch, rate, axis=0)
        if self.head_prob is None:
            replace_head = rng.random(len(neg)) < 0.5
        else:
            replace_head = rng.random(len(neg)) < self.head_prob[neg[:, 1]]
        col = np.where(replace_head, 0, 2)
        pending = np.arange(len(neg))
        while len(pending):
            neg[pending, col[pending]] = rng.integers(0, self.n_ent, size=len(pending))
            pending = pending[self._is_known(neg[pending])]
        return neg

    def corrupt_relations(self, batch: np.ndarray, rate: int, rng: np.random.Generator) -> np.ndarray:
        neg = np.repeat(batch, rate, axis=0)
        pending = np.arange(len(neg))
        while len(pending):
            neg[pending, 1] = rng.integers(0, self.n_rel, size=len(pending))
            pending = pending[self._is_known(neg[pending])]
        return neg


def _renormalize(model: EmbeddingModel) -> None:
    if model.kind in (ModelKind.TRANSE, ModelKind.TRANSH):
        norms = np.linalg.norm(model.entities, axis=1, keepdims=True)
        np.divide(model.entities, norms, out=model.entities, where=norms > 0)
    if model.kind is ModelKind.TRANSH:
        w = model.aux["normals"]
        norms = np.linalg.norm(w, axis=1, keepdims=True)
        np.divide(w, norms, out=w, where=norms > 0)


@dataclass
class TrainResult:
    model: EmbeddingModel
    epoch_losses: list[float]


def train(kg: KnowledgeGraph, config: ModelConfig) -> TrainResult:
    """Train one embedding model on every triple of `kg`."""
    config.validate()
    if not kg.triples:
        raise TrainingError("cannot train on an empty graph")
    triples = np.asarray(kg.triples, dtype=np.int64)
    rng = np.random.default_rng([config.seed, 101])
    model = init_model(kg.num_entities, kg.num_relations, config, rng)
    _renormalize(model)
    opt = _Optimizer(model, config)
    sampler = NegativeSampler(kg, config)
    losses: list[float] = []
    for epoch in range(config.epochs):
        order = rng.permutation(len(triples))
        batches = [b for b in np.array_split(order, config.nr_batches) if len(b)]
        epoch_sum = 0.0
        epoch_pairs = 0
        state = {"err": None}

        def run_batches(shard, _epoch=epoch):
            nonlocal epoch_sum, epoch_pairs
            for bi in shard:
                batch = triples[batches[bi]]
                pos_parts, neg_parts = [], []
                if config.entity_negative_rate > 0:
                    neg_parts.append(sampler.corrupt_entities(batch, config.entity_negative_rate, rng))
                    pos_parts.append(np.repeat(batch, config.entity_negative_rate, axis=0))
                if config.relation_negative_rate > 0:
                    neg_parts.append(sampler.corrupt_relations(batch, config.relation_negative_rate, rng))
                    pos_parts.append(np.repeat(batch, config.relation_negative_rate, axis=0))
                if not neg_parts:
                    continue
                pos = np.concatenate(pos_parts)
                neg = np.concatenate(neg_parts)
                pair_losses, contribs = pair_losses_and_grads(model, config, pos, neg)
                batch_loss = float(np.mean(pair_losses))
                if not np.isfinite(batch_loss):
                    state["err"] = TrainingError(
                        f"non-finite loss at epoch {_epoch}, batch {bi} ({config.kind.value})"
                    )
                    return
                opt.step(accumulate_grads(contribs, 1.0 / len(pos)))
                epoch_sum += float(np.sum(pair_losses))
                epoch_pairs += len(pos)

        run_sharded(list(range(len(batches))), config.workers, run_batches)
        if state["err"] is not None:
            raise state["err"]
        _renormalize(model)
        losses.append(epoch_sum / max(epoch_pairs, 1))
    if not all(np.isfinite(v).all() for v in model.all_params().values()):
        raise TrainingError(f"non-finite parameters after training ({config.kind.value})")
    return TrainResult(model=model, epoch_losses=losses)
