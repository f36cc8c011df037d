"""Pair feature aggregation and the four supervised classifiers.

Gene and disease vectors combine through five operators; the concatenation
doubles the feature length, the rest keep it.  Naive Bayes, the MLP and the
random forest wrap scikit-learn estimators pinned to the stock
hyperparameters; the boosted-tree classifier is the in-house implementation
from :mod:`gdabench.gbt`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from sklearn.ensemble import RandomForestClassifier
from sklearn.naive_bayes import GaussianNB
from sklearn.neural_network import MLPClassifier

from .errors import TrainingError
from .gbt import GradientBoostedTrees
from .split import GdaPair


class AggregationOp(str, enum.Enum):
    CONCATENATION = "concatenation"
    AVERAGE = "average"
    HADAMARD = "hadamard"
    WEIGHTED_L1 = "weighted_l1"
    WEIGHTED_L2 = "weighted_l2"


def aggregate(op: AggregationOp, g_vec: np.ndarray, d_vec: np.ndarray) -> np.ndarray:
    g_vec = np.asarray(g_vec, dtype=float)
    d_vec = np.asarray(d_vec, dtype=float)
    if g_vec.shape != d_vec.shape:
        raise ValueError(f"vector length mismatch: {g_vec.shape} vs {d_vec.shape}")
    op = AggregationOp(op)
    if op is AggregationOp.CONCATENATION:
        return np.concatenate([g_vec, d_vec])
    if op is AggregationOp.AVERAGE:
        return (g_vec + d_vec) / 2.0
    if op is AggregationOp.HADAMARD:
        return g_vec * d_vec
    if op is AggregationOp.WEIGHTED_L1:
        return np.abs(g_vec - d_vec)
    return (g_vec - d_vec) ** 2


@dataclass(frozen=True)
class PairFeatures:
    pair: GdaPair
    vector: np.ndarray
    op: AggregationOp


def build_pair_features(
    pairs: Sequence[GdaPair], table: dict[int, np.ndarray], op: AggregationOp
) -> list[PairFeatures]:
    return [PairFeatures(p, aggregate(op, table[p.gene], table[p.disease]), op) for p in pairs]


class ClassifierKind(str, enum.Enum):
    NAIVE_BAYES = "naive_bayes"
    MLP = "mlp"
    RANDOM_FOREST = "random_forest"
    GRADIENT_BOOSTED_TREES = "gbt"


@dataclass(frozen=True)
class ClassifierSpec:
    kind: ClassifierKind
    max_depth: int = 4
    n_estimators: int = 100
    learning_rate: float = 0.1
    hidden_layers: tuple[int, ...] = (10, 10)
    l2_alpha: float = 0.0001
    var_smoothing: float = 1e-9
    seed: int = 1


def default_spec(kind: ClassifierKind | str, **overrides) -> ClassifierSpec:
    return ClassifierSpec(kind=ClassifierKind(kind), **overrides)


@dataclass
class TrainedClassifier:
    kind: ClassifierKind
    estimator: object
    n_features: int

    def predict_proba_rows(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        proba = self.estimator.predict_proba(X)
        return proba / proba.sum(axis=1, keepdims=True)


def _make_estimator(spec: ClassifierSpec, n_samples: int):
    if spec.kind is ClassifierKind.NAIVE_BAYES:
        return GaussianNB(var_smoothing=spec.var_smoothing)
    if spec.kind is ClassifierKind.MLP:
        # validation-based early stopping needs enough rows for a held-out slice
        return MLPClassifier(
            hidden_layer_sizes=spec.hidden_layers,
            activation="relu",
            solver="adam",
            alpha=spec.l2_alpha,
            batch_size=min(32, n_samples),
            max_iter=200,
            early_stopping=n_samples >= 20,
            n_iter_no_change=10,
            random_state=spec.seed,
        )
    if spec.kind is ClassifierKind.RANDOM_FOREST:
        return RandomForestClassifier(
            n_estimators=spec.n_estimators,
            max_depth=spec.max_depth,
            criterion="gini",
            max_features="sqrt",
            random_state=spec.seed,
        )
    return GradientBoostedTrees(
        n_estimators=spec.n_estimators,
        max_depth=spec.max_depth,
        learning_rate=spec.learning_rate,
        seed=spec.seed,
    )


def fit(
    spec: ClassifierSpec,
    features: Sequence[PairFeatures] | np.ndarray,
    labels: Sequence[bool] | None = None,
) -> TrainedClassifier:
    """Fit one classifier; labels default to the pairs' own labels."""
    if isinstance(features, np.ndarray):
        X = np.asarray(features, dtype=float)
        names = [str(i) for i in range(len(X))]
    else:
        X = np.stack([f.vector for f in features]).astype(float)
        names = [f"({f.pair.gene}, {f.pair.disease})" for f in features]
        if labels is None:
            labels = [f.pair.positive for f in features]
    if labels is None:
        raise TrainingError("labels are required for raw feature matrices")
    y = np.asarray(labels, dtype=int)
    bad = ~np.isfinite(X).all(axis=1)
    if bad.any():
        raise TrainingError(f"non-finite features for pair {names[int(np.argmax(bad))]}")
    if len(np.unique(y)) < 2:
        raise TrainingError("training data holds a single class")
    est = _make_estimator(spec, len(y))
    est.fit(X, y)
    return TrainedClassifier(kind=spec.kind, estimator=est, n_features=X.shape[1])


def predict_proba(clf: TrainedClassifier, features: PairFeatures | np.ndarray) -> tuple[float, float]:
    """(p_negative, p_positive) for one pair; the two sum to 1."""
    vec = features.vector if isinstance(features, PairFeatures) else features
    row = clf.predict_proba_rows(np.asarray(vec, dtype=float).reshape(1, -1))[0]
    return float(row[0]), float(row[1])


# ---------------------------------------------------------------------------
# prediction dump: one row per test pair


@dataclass(frozen=True)
class PredictionRow:
    gene: int
    disease: int
    p_neg: float
    p_pos: float
    predicted: bool
    truth: bool


def predict_pairs(
    clf: TrainedClassifier, features: Sequence[PairFeatures]
) -> list[PredictionRow]:
    if not features:
        return []
    X = np.stack([f.vector for f in features]).astype(float)
    proba = clf.predict_proba_rows(X)
    return [
        PredictionRow(
            gene=f.pair.gene,
            disease=f.pair.disease,
            p_neg=float(p[0]),
            p_pos=float(p[1]),
            predicted=bool(p[1] >= 0.5),
            truth=f.pair.positive,
        )
        for f, p in zip(features, proba)
    ]


def save_predictions(rows: Sequence[PredictionRow], vocab, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in rows:
            fh.write(
                "{}\t{}\t{:.10g}\t{:.10g}\t{}\t{}\n".format(
                    vocab.entity_name(r.gene),
                    vocab.entity_name(r.disease),
                    r.p_neg,
                    r.p_pos,
                    "positive" if r.predicted else "negative",
                    "positive" if r.truth else "negative",
                )
            )


def load_predictions(path: str | Path, vocab) -> list[PredictionRow]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            gene, disease, p_neg, p_pos, pred, truth = line.split("\t")
            rows.append(
                PredictionRow(
                    gene=vocab.entity_id(gene),
                    disease=vocab.entity_id(disease),
                    p_neg=float(p_neg),
                    p_pos=float(p_pos),
                    predicted=(pred == "positive"),
                    truth=(truth == "positive"),
                )
            )
    return rows
