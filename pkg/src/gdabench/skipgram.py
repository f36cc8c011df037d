"""Skip-gram with negative sampling over walk corpora, in plain numpy.

Follows the classic recipe: unigram^0.75 negative distribution, frequent-token
subsampling, per-position shrunk windows, and a learning rate that decays
linearly from `alpha` to `min_alpha` across all epochs.  Updates are applied
in small batches (simultaneous within a batch), which keeps the run
deterministic under the config seed with a single worker.  Tokens occurring
fewer than `min_count` times are pruned, except seed-entity tokens, which are
always kept so every requested seed receives a vector.
"""

from __future__ import annotations

import numpy as np

from .errors import TrainingError
from .util import run_sharded, sigmoid
from .walks import WalkConfig, WalkCorpus, entity_token


def _build_vocab(corpus: WalkCorpus, config: WalkConfig, seed_tokens: set[str]):
    counts: dict[str, int] = {}
    for walk in corpus.walks:
        for tok in walk:
            counts[tok] = counts.get(tok, 0) + 1
    vocab = [
        tok
        for tok, c in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        if c >= config.min_count or tok in seed_tokens
    ]
    index = {tok: i for i, tok in enumerate(vocab)}
    freq = np.array([counts[tok] for tok in vocab], dtype=float)
    return index, freq


def _keep_probability(freq: np.ndarray, sample: float) -> np.ndarray:
    if sample <= 0:
        return np.ones_like(freq)
    f = freq / freq.sum()
    p = (np.sqrt(f / sample) + 1.0) * (sample / f)
    return np.minimum(p, 1.0)


def _epoch_pairs(sentences, keep_prob, window, rng) -> np.ndarray:
    """(center, context) index pairs for one epoch, after subsampling."""
    centers, contexts = [], []
    for sent in sentences:
        if len(sent) > 1:
            kept = sent[rng.random(len(sent)) < keep_prob[sent]]
        else:
            kept = sent
        for i in range(len(kept)):
            b = int(rng.integers(1, window + 1))
            lo, hi = max(0, i - b), min(len(kept), i + b + 1)
            for j in range(lo, hi):
                if j != i:
                    centers.append(kept[i])
                    contexts.append(kept[j])
    if not centers:
        return np.empty((0, 2), dtype=np.int64)
    return np.stack([np.asarray(centers, dtype=np.int64), np.asarray(contexts, dtype=np.int64)], axis=1)


def train_skipgram(
    corpus: WalkCorpus, config: WalkConfig, seeds: set[int]
) -> dict[int, np.ndarray]:
    """Train token vectors and return one per requested seed entity."""
    if not corpus.walks:
        raise TrainingError("empty walk corpus")
    seed_tokens = {entity_token(e) for e in seeds}
    index, freq = _build_vocab(corpus, config, seed_tokens)
    missing = sorted(e for e in seeds if entity_token(e) not in index)
    if missing:
        raise TrainingError(f"seed entities absent from corpus: {missing}")
    n_vocab = len(index)
    sentences = [
        np.array([index[t] for t in walk if t in index], dtype=np.int64) for walk in corpus.walks
    ]
    keep_prob = _keep_probability(freq, config.sample)
    noise = freq**config.ns_exponent
    noise_cum = np.cumsum(noise / noise.sum())

    rng = np.random.default_rng([config.seed, 733])
    W = rng.uniform(-0.5, 0.5, size=(n_vocab, config.dim)) / config.dim
    C = np.zeros((n_vocab, config.dim))

    # one dry pass estimates the schedule length; the rate floor catches drift
    total_pairs = max(
        1, config.epochs * len(_epoch_pairs(sentences, keep_prob, config.window, np.random.default_rng([config.seed, 7])))
    )
    done = 0
    for _epoch in range(config.epochs):
        pairs = _epoch_pairs(sentences, keep_prob, config.window, rng)
        if not len(pairs):
            continue
        starts = list(range(0, len(pairs), config.batch_pairs))

        def run_slice(shard):
            nonlocal done
            for s in shard:
                chunk = pairs[s : s + config.batch_pairs]
                lr = max(config.min_alpha, config.alpha * (1.0 - done / total_pairs))
                _sgns_batch(W, C, chunk, noise_cum, config.negative, lr, rng)
                done += len(chunk)

        run_sharded(starts, config.workers, run_slice)
    if not np.isfinite(W).all():
        raise TrainingError("non-finite skip-gram parameters")
    return {e: W[index[entity_token(e)]].copy() for e in sorted(seeds)}


def _sgns_batch(W, C, pairs, noise_cum, k_negative, lr, rng) -> None:
    centers = pairs[:, 0]
    pos = pairs[:, 1]
    b = len(pairs)
    negs = np.searchsorted(noise_cum, rng.random((b, k_negative)))
    targets = np.concatenate([pos[:, None], negs], axis=1)  # (b, 1+k)
    labels = np.zeros((b, 1 + k_negative))
    labels[:, 0] = 1.0
    v = W[centers]  # (b, d)
    u = C[targets]  # (b, 1+k, d)
    logits = np.einsum("bd,bkd->bk", v, u)
    g = (labels - sigmoid(logits)) * lr  # (b, 1+k)
    grad_v = np.einsum("bk,bkd->bd", g, u)
    grad_u = g[:, :, None] * v[:, None, :]
    np.add.at(C, targets.ravel(), grad_u.reshape(-1, v.shape[1]))
    np.add.at(W, centers, grad_v)
