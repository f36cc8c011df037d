"""Embedding parameters and the six scoring functions.

All scores follow a single convention: higher means a more likely triple.
Models that define a distance return the negated distance, so rankings can
sort every model's output descending.

Parameter matrices per kind (beyond `entities` and `relations`):

* transd: ``ent_proj`` (|E| x d) and ``rel_proj`` (|R| x d) projection vectors;
  an entity's projected form is ``e + (e_proj . e) * r_proj``.
* transh: ``normals`` (|R| x d) hyperplane normals; `relations` holds the
  per-relation translation vectors.
* complex: ``ent_im`` / ``rel_im`` imaginary parts; `entities` / `relations`
  hold the real parts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import ModelConfig, ModelKind


@dataclass
class EmbeddingModel:
    kind: ModelKind
    entities: np.ndarray  # (n_ent, dim) float64
    relations: np.ndarray  # (n_rel, dim)
    aux: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.entities.shape[1]

    @property
    def num_entities(self) -> int:
        return self.entities.shape[0]

    @property
    def num_relations(self) -> int:
        return self.relations.shape[0]

    def all_params(self) -> dict[str, np.ndarray]:
        return {"entities": self.entities, "relations": self.relations, **self.aux}

    def copy(self) -> "EmbeddingModel":
        return EmbeddingModel(
            kind=self.kind,
            entities=self.entities.copy(),
            relations=self.relations.copy(),
            aux={k: v.copy() for k, v in self.aux.items()},
        )


def init_model(n_ent: int, n_rel: int, config: ModelConfig, rng: np.random.Generator) -> EmbeddingModel:
    """Uniform initialization in [-6/sqrt(dim), 6/sqrt(dim)] for every matrix."""
    d = config.dim
    bound = 6.0 / np.sqrt(d)

    def mat(rows: int) -> np.ndarray:
        return rng.uniform(-bound, bound, size=(rows, d))

    aux: dict[str, np.ndarray] = {}
    if config.kind is ModelKind.TRANSD:
        aux["ent_proj"] = mat(n_ent)
        aux["rel_proj"] = mat(n_rel)
    elif config.kind is ModelKind.TRANSH:
        normals = mat(n_rel)
        normals /= np.linalg.norm(normals, axis=1, keepdims=True)
        aux["normals"] = normals
    elif config.kind is ModelKind.COMPLEX:
        aux["ent_im"] = mat(n_ent)
        aux["rel_im"] = mat(n_rel)
    return EmbeddingModel(kind=config.kind, entities=mat(n_ent), relations=mat(n_rel), aux=aux)


def circular_correlation(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """FFT circular correlation, (a*b)_k = sum_i a_i b_{(k+i) mod d}; rows batched."""
    return np.real(np.fft.ifft(np.conj(np.fft.fft(a, axis=-1)) * np.fft.fft(b, axis=-1), axis=-1))


def circular_convolution(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.real(np.fft.ifft(np.fft.fft(a, axis=-1) * np.fft.fft(b, axis=-1), axis=-1))


def _transd_project(e: np.ndarray, e_proj: np.ndarray, r_proj: np.ndarray) -> np.ndarray:
    return e + np.sum(e_proj * e, axis=-1, keepdims=True) * r_proj


def _transh_project(e: np.ndarray, w: np.ndarray) -> np.ndarray:
    return e - np.sum(w * e, axis=-1, keepdims=True) * w


def score_batch(
    model: EmbeddingModel,
    heads: np.ndarray,
    rels: np.ndarray,
    tails: np.ndarray,
    norm: str = "l2",
) -> np.ndarray:
    """Score triples given as parallel index arrays (broadcast to a common shape)."""
    heads, rels, tails = np.broadcast_arrays(np.asarray(heads), np.asarray(rels), np.asarray(tails))
    h = model.entities[heads]
    r = model.relations[rels]
    t = model.entities[tails]
    kind = model.kind
    if kind is ModelKind.TRANSE:
        diff = h + r - t
        if norm == "l1":
            return -np.sum(np.abs(diff), axis=-1)
        return -np.sqrt(np.maximum(np.sum(diff * diff, axis=-1), 1e-300))
    if kind is ModelKind.TRANSD:
        hp = model.aux["ent_proj"][heads]
        tp = model.aux["ent_proj"][tails]
        rp = model.aux["rel_proj"][rels]
        diff = _transd_project(h, hp, rp) + r - _transd_project(t, tp, rp)
        return -np.sum(diff * diff, axis=-1)
    if kind is ModelKind.TRANSH:
        w = model.aux["normals"][rels]
        diff = _transh_project(h, w) + r - _transh_project(t, w)
        return -np.sum(diff * diff, axis=-1)
    if kind is ModelKind.DISTMULT:
        return np.sum(h * r * t, axis=-1)
    if kind is ModelKind.HOLE:
        return np.sum(r * circular_correlation(h, t), axis=-1)
    if kind is ModelKind.COMPLEX:
        hi = model.aux["ent_im"][heads]
        ti = model.aux["ent_im"][tails]
        ri = model.aux["rel_im"][rels]
        # Re(<h, r, conj(t)>) expanded over real/imaginary parts
        return np.sum(h * r * t + hi * r * ti + h * ri * ti - hi * ri * t, axis=-1)
    raise ValueError(f"unknown model kind {kind!r}")


def score(model: EmbeddingModel, h: int, r: int, t: int, norm: str = "l2") -> float:
    """Score a single triple; raises IndexError on unknown ids."""
    for eid in (h, t):
        if not 0 <= eid < model.num_entities:
            raise IndexError(f"entity id {eid} out of range")
    if not 0 <= r < model.num_relations:
        raise IndexError(f"relation id {r} out of range")
    return float(score_batch(model, np.array([h]), np.array([r]), np.array([t]), norm=norm)[0])
