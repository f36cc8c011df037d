"""Gradient-boosted regression trees with logistic loss, built in numpy.

Greedy depth-limited trees fit the negative log-loss gradient each round;
leaf values take a damped Newton step (sum of residuals over sum of hessians).
No row or column subsampling, so training is deterministic by construction.
The per-round training log-loss is recorded for inspection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import TrainingError
from .util import sigmoid


@dataclass
class _Node:
    feature: int = -1
    threshold: float = 0.0
    value: float = 0.0
    left: "_Node | None" = None
    right: "_Node | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())


def _best_split(X: np.ndarray, g: np.ndarray) -> tuple[int, float, float] | None:
    """Feature/threshold minimizing squared error against the gradients."""
    n = len(g)
    total = g.sum()
    best_gain, best = 0.0, None
    for j in range(X.shape[1]):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        gs = g[order]
        csum = np.cumsum(gs)[:-1]
        n_left = np.arange(1, n)
        valid = xs[1:] != xs[:-1]
        if not valid.any():
            continue
        # variance reduction == gain of sum_left^2/n_left + sum_right^2/n_right
        gain = csum**2 / n_left + (total - csum) ** 2 / (n - n_left) - total**2 / n
        gain = np.where(valid, gain, -np.inf)
        k = int(np.argmax(gain))
        if gain[k] > best_gain + 1e-12:
            best_gain = float(gain[k])
            best = (j, float((xs[k] + xs[k + 1]) / 2.0))
    if best is None:
        return None
    return best[0], best[1], best_gain


def _leaf_value(g: np.ndarray, h: np.ndarray) -> float:
    return float(g.sum() / max(h.sum(), 1e-12))


def _grow(X, g, h, depth, max_depth) -> _Node:
    node = _Node(value=_leaf_value(g, h))
    if depth >= max_depth or len(g) < 2:
        return node
    split = _best_split(X, g)
    if split is None:
        return node
    j, thr, _ = split
    mask = X[:, j] <= thr
    node.feature, node.threshold = j, thr
    node.left = _grow(X[mask], g[mask], h[mask], depth + 1, max_depth)
    node.right = _grow(X[~mask], g[~mask], h[~mask], depth + 1, max_depth)
    return node


def _predict_tree(node: _Node, X: np.ndarray) -> np.ndarray:
    if node.is_leaf:
        return np.full(len(X), node.value)
    out = np.empty(len(X))
    mask = X[:, node.feature] <= node.threshold
    out[mask] = _predict_tree(node.left, X[mask])
    out[~mask] = _predict_tree(node.right, X[~mask])
    return out


def _log_loss(y: np.ndarray, p: np.ndarray) -> float:
    p = np.clip(p, 1e-12, 1 - 1e-12)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))


@dataclass
class GradientBoostedTrees:
    n_estimators: int = 100
    max_depth: int = 4
    learning_rate: float = 0.1
    seed: int = 1  # accepted for interface parity; the fit is deterministic

    trees: list[_Node] = field(default_factory=list)
    base_score: float = 0.0
    loss_history: list[float] = field(default_factory=list)

    def fit(self, X: np.ndarray, y: np.ndarray) -> "GradientBoostedTrees":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if not np.isfinite(X).all():
            raise TrainingError("non-finite feature values")
        classes = np.unique(y)
        if len(classes) < 2:
            raise TrainingError("training data holds a single class")
        prior = np.clip(y.mean(), 1e-6, 1 - 1e-6)
        self.base_score = float(np.log(prior / (1 - prior)))
        raw = np.full(len(y), self.base_score)
        self.trees = []
        self.loss_history = []
        for _ in range(self.n_estimators):
            p = sigmoid(raw)
            grad = y - p
            hess = p * (1 - p)
            tree = _grow(X, grad, hess, depth=0, max_depth=self.max_depth)
            self.trees.append(tree)
            raw = raw + self.learning_rate * _predict_tree(tree, X)
            self.loss_history.append(_log_loss(y, sigmoid(raw)))
        return self

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        raw = np.full(len(X), self.base_score)
        for tree in self.trees:
            raw += self.learning_rate * _predict_tree(tree, X)
        return raw

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        p_pos = sigmoid(self.decision_function(X))
        return np.stack([1.0 - p_pos, p_pos], axis=1)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.decision_function(X) > 0).astype(int)
