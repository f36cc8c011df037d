"""Rank-based evaluation shared by both prediction families.

Candidate lists are restricted to test-set entities of the queried kind.
True associations missing from a list receive the fixed penalty rank of
1000, which drops them out of every hits@k at k <= 999.  hits@k divides the
hit count by the number of evaluated true associations; callers that want a
different denominator (for example, all test pairs) can pass one explicitly.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import EvalError
from .lp.ranking import CandidateRanking
from .pairs import PredictionRow

PENALTY_RANK = 1000

LINK_PREDICTION = "link_prediction"
NODE_PAIR_CLASSIFICATION = "node_pair_classification"


class Direction(str, enum.Enum):
    GENE_TO_DISEASE = "gene_to_disease"
    DISEASE_TO_GENE = "disease_to_gene"


@dataclass(frozen=True)
class UnifiedRanking:
    query: int
    direction: Direction
    candidates: tuple[tuple[int, float], ...]  # (entity, likelihood) descending
    source: str
    method: str


@dataclass(frozen=True)
class RankRecord:
    query: int
    truth: int
    rank: int
    found: bool


def unify_lp(
    ranking: CandidateRanking,
    test_entities: set[int],
    direction: Direction,
    method: str,
    top_k: int | None = None,
) -> UnifiedRanking:
    """Restrict a sorted candidate ranking to test-set entities, keeping order.

    `top_k` optionally truncates the raw ranking first, mirroring reports
    that only keep each method's strongest candidates.
    """
    cands = ranking.candidates if top_k is None else ranking.candidates[:top_k]
    kept = tuple((e, s) for e, s in cands if e in test_entities)
    return UnifiedRanking(
        query=ranking.query,
        direction=direction,
        candidates=kept,
        source=LINK_PREDICTION,
        method=method,
    )


def unify_clf(
    predictions: Sequence[PredictionRow], query: int, direction: Direction, method: str
) -> UnifiedRanking:
    """All test partners of `query` ordered by p_pos, ties by ascending id."""
    if direction is Direction.GENE_TO_DISEASE:
        rows = [(r.disease, r.p_pos) for r in predictions if r.gene == query]
    else:
        rows = [(r.gene, r.p_pos) for r in predictions if r.disease == query]
    if not rows:
        raise EvalError(f"query entity {query} absent from predictions")
    rows.sort(key=lambda item: (-item[1], item[0]))
    return UnifiedRanking(
        query=query,
        direction=direction,
        candidates=tuple(rows),
        source=NODE_PAIR_CLASSIFICATION,
        method=method,
    )


def extract_ranks(ranking: UnifiedRanking, truths: Iterable[int]) -> list[RankRecord]:
    """One record per truth: its 1-based rank, or the penalty when absent."""
    truths = sorted(set(truths))
    if not truths:
        raise EvalError("no true associations to rank")
    position = {e: i + 1 for i, (e, _) in enumerate(ranking.candidates)}
    records = []
    for truth in truths:
        rank = position.get(truth)
        if rank is None:
            records.append(RankRecord(ranking.query, truth, PENALTY_RANK, found=False))
        else:
            records.append(RankRecord(ranking.query, truth, rank, found=True))
    return records


def hits_at_k(records: Sequence[RankRecord], k: int, denominator: int | None = None) -> float:
    if k < 1:
        raise EvalError("k must be >= 1")
    if not records:
        raise EvalError("hits@k of an empty record list is undefined")
    n = denominator if denominator is not None else len(records)
    return sum(1 for r in records if r.rank <= k) / n


def random_hits_baseline(candidate_counts: Sequence[int], k: int) -> float:
    """Expected hits@k of a uniformly random ranking, one count per record."""
    if not candidate_counts:
        raise EvalError("baseline of an empty record list is undefined")
    return sum(min(k, m) / m if m > 0 else 0.0 for m in candidate_counts) / len(candidate_counts)


# ---------------------------------------------------------------------------
# case-study tables


@dataclass(frozen=True)
class CaseStudyTable:
    query: int
    methods: tuple[str, ...]
    rows: tuple[tuple[int, tuple[int | None, ...]], ...]  # (truth, rank per method)

    def to_tsv(self, vocab=None) -> str:
        name = (lambda e: vocab.entity_name(e)) if vocab is not None else str
        lines = ["\t".join(["entity", *self.methods])]
        for truth, ranks in self.rows:
            cells = [str(r) if r is not None else "-" for r in ranks]
            lines.append("\t".join([name(truth), *cells]))
        return "\n".join(lines) + "\n"


def case_study(query: int, methods: Sequence[UnifiedRanking], truths: Iterable[int]) -> CaseStudyTable:
    """Rank of each truth under every method; rows follow the first method's ranks."""
    if not methods:
        raise EvalError("case study needs at least one method ranking")
    if any(m.query != query for m in methods):
        raise EvalError("method rankings disagree on the query entity")
    truths = sorted(set(truths))
    per_method = []
    for m in methods:
        position = {e: i + 1 for i, (e, _) in enumerate(m.candidates)}
        per_method.append({t: position.get(t) for t in truths})
    first = per_method[0]
    ordered = sorted(truths, key=lambda t: (first[t] if first[t] is not None else float("inf"), t))
    rows = tuple((t, tuple(pm[t] for pm in per_method)) for t in ordered)
    return CaseStudyTable(query=query, methods=tuple(m.method for m in methods), rows=rows)


# ---------------------------------------------------------------------------
# the aggregated report


@dataclass(frozen=True)
class MethodScores:
    hits1: float
    hits3: float
    hits10: float
    n_records: int
    n_queries: int

    def as_dict(self) -> dict:
        return {
            "hits@1": self.hits1,
            "hits@3": self.hits3,
            "hits@10": self.hits10,
            "n_records": self.n_records,
            "n_queries": self.n_queries,
        }


def score_records(records: Sequence[RankRecord]) -> MethodScores:
    return MethodScores(
        hits1=hits_at_k(records, 1),
        hits3=hits_at_k(records, 3),
        hits10=hits_at_k(records, 10),
        n_records=len(records),
        n_queries=len({r.query for r in records}),
    )


@dataclass
class EvalReport:
    # variant -> method -> direction value -> scores
    results: dict[str, dict[str, dict[str, MethodScores]]] = field(default_factory=dict)
    baselines: dict[str, dict[str, float]] = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def add(self, variant: str, method: str, direction: Direction, scores: MethodScores) -> None:
        self.results.setdefault(variant, {}).setdefault(method, {})[direction.value] = scores

    def to_json(self) -> str:
        payload = {
            "provenance": self.provenance,
            "baselines": self.baselines,
            "results": {
                variant: {
                    method: {direction: s.as_dict() for direction, s in by_dir.items()}
                    for method, by_dir in by_method.items()
                }
                for variant, by_method in self.results.items()
            },
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def to_tsv(self, metric: str, direction: Direction) -> str:
        """Flat table: rows are graph variants, columns are methods."""
        attr = {"hits@1": "hits1", "hits@3": "hits3", "hits@10": "hits10"}[metric]
        methods = sorted({m for by_method in self.results.values() for m in by_method})
        lines = ["\t".join(["kg", *methods])]
        for variant in sorted(self.results):
            cells = []
            for m in methods:
                scores = self.results[variant].get(m, {}).get(direction.value)
                cells.append(f"{getattr(scores, attr):.3f}" if scores is not None else "-")
            lines.append("\t".join([variant, *cells]))
        return "\n".join(lines) + "\n"

    def save(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(self.to_json(), encoding="utf-8")
        for metric, tag in (("hits@1", "hits1"), ("hits@3", "hits3"), ("hits@10", "hits10")):
            for direction in Direction:
                text = self.to_tsv(metric, direction)
                (out / f"report_{tag}_{direction.value}.tsv").write_text(text, encoding="utf-8")
