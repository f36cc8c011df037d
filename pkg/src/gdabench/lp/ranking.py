"""Candidate scoring and rank ordering for one query entity."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..errors import EvalError
from ..kg import EntityKind
from .models import EmbeddingModel, score_batch


class PredictDirection(enum.Enum):
    PREDICT_TAIL = "predict_tail"
    PREDICT_HEAD = "predict_head"


@dataclass(frozen=True)
class CandidateRanking:
    query: int
    relation: int
    direction: PredictDirection
    candidates: tuple[tuple[int, float], ...]  # (entity, score) descending


def rank_candidates(
    model: EmbeddingModel,
    query: int,
    relation: int,
    direction: PredictDirection,
    candidate_pool: Sequence[int],
    norm: str = "l2",
) -> CandidateRanking:
    """Score every pool member in the missing slot and sort descending.

    Ties are broken by ascending entity id, so the order is total and
    reruns are identical.  The caller must keep the query out of the pool.
    """
    pool = np.unique(np.asarray(list(candidate_pool), dtype=np.int64))
    if pool.size == 0:
        raise EvalError("candidate pool is empty")
    if query in pool:
        raise EvalError("query entity must not be part of the candidate pool")
    rel = np.int64(relation)
    if direction is PredictDirection.PREDICT_TAIL:
        scores = score_batch(model, np.int64(query), rel, pool, norm=norm)
    else:
        scores = score_batch(model, pool, rel, np.int64(query), norm=norm)
    # lexsort: primary descending score, secondary ascending id
    order = np.lexsort((pool, -scores))
    cands = tuple((int(pool[i]), float(scores[i])) for i in order)
    return CandidateRanking(query=query, relation=relation, direction=direction, candidates=cands)


def filter_by_kind(
    ranking: CandidateRanking, kinds: Mapping[int, EntityKind], kind: EntityKind
) -> CandidateRanking:
    """Keep only candidates of the requested kind, preserving order."""
    kept = tuple((e, s) for e, s in ranking.candidates if kinds.get(e) is kind)
    return CandidateRanking(
        query=ranking.query, relation=ranking.relation, direction=ranking.direction, candidates=kept
    )
