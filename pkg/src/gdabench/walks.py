"""Graph walk extraction for the walk-based embedding path.

Walks follow out-edges only, record alternating entity and relation tokens
(``e<id>`` / ``r<id>``), start at a seed entity and stop early at sinks, so a
walk of depth L holds at most 2L+1 tokens.  Each seed gets its own generator
derived from the master seed, which makes per-seed generation order-free and
reproducible.

An optional refinement replaces non-seed entity tokens by neighbourhood
labels computed by iterative relabeling (depth `wl_depth`); the default depth
of 0 keeps plain entity tokens.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .kg import KnowledgeGraph

Walk = tuple[str, ...]


@dataclass(frozen=True)
class WalkConfig:
    max_walk_length: int = 8
    walks_per_entity: int = 500
    dim: int = 200
    window: int = 5
    negative: int = 5
    epochs: int = 5
    min_count: int = 5
    sample: float = 0.001
    alpha: float = 0.025
    min_alpha: float = 0.0001
    ns_exponent: float = 0.75
    batch_pairs: int = 1024
    seed: int = 1
    emit_relations: bool = True
    dedup: bool = True
    wl_depth: int = 0
    workers: int = 1


def entity_token(eid: int) -> str:
    return f"e{eid}"


def relation_token(rid: int) -> str:
    return f"r{rid}"


def token_entity(token: str) -> int | None:
    if token.startswith("e") and token[1:].isdigit():
        return int(token[1:])
    return None


@dataclass
class WalkCorpus:
    walks: list[Walk] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.walks)

    def seeds(self) -> set[int]:
        out = set()
        for walk in self.walks:
            eid = token_entity(walk[0])
            if eid is not None:
                out.add(eid)
        return out


def _wl_labels(kg: KnowledgeGraph, depth: int) -> dict[int, str]:
    """Iterative neighbourhood relabeling; digests keep labels stable."""
    labels = {e: str(e) for e in range(kg.num_entities)}
    for _ in range(depth):
        fresh = {}
        for e, lab in labels.items():
            nbr = ",".join(f"{r}:{labels[t]}" for r, t in kg.out_edges.get(e, ()))
            digest = hashlib.sha1(f"{lab}|{nbr}".encode()).hexdigest()[:12]
            fresh[e] = digest
        labels = fresh
    return labels


def generate_walks(kg: KnowledgeGraph, seeds: Iterable[int], config: WalkConfig) -> WalkCorpus:
    """Up to `walks_per_entity` random walks from each seed over out-edges."""
    wl = _wl_labels(kg, config.wl_depth) if config.wl_depth > 0 else None

    def token_for(eid: int, is_seed: bool) -> str:
        if wl is not None and not is_seed:
            return f"wl{wl[eid]}"
        return entity_token(eid)

    corpus = WalkCorpus()
    for seed_entity in sorted(set(seeds)):
        rng = np.random.default_rng([config.seed, seed_entity])
        seen: set[Walk] = set()
        collected: list[Walk] = []
        for _ in range(config.walks_per_entity):
            tokens = [entity_token(seed_entity)]
            current = seed_entity
            for _ in range(config.max_walk_length):
                edges = kg.out_edges.get(current, ())
                if not edges:
                    break
                rel, nxt = edges[rng.integers(len(edges))]
                if config.emit_relations:
                    tokens.append(relation_token(rel))
                tokens.append(token_for(nxt, is_seed=False))
                current = nxt
            walk = tuple(tokens)
            if config.dedup:
                if walk not in seen:
                    seen.add(walk)
                    collected.append(walk)
            else:
                collected.append(walk)
        corpus.walks.extend(collected)
    return corpus


def save_corpus(corpus: WalkCorpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for walk in corpus.walks:
            fh.write(" ".join(walk))
            fh.write("\n")


def load_corpus(path: str | Path) -> WalkCorpus:
    walks = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                walks.append(tuple(line.split(" ")))
    return WalkCorpus(walks=walks)


def walk_is_path(kg: KnowledgeGraph, walk: Sequence[str]) -> bool:
    """True when every consecutive (entity, relation, entity) token triple is an edge."""
    if len(walk) < 3:
        return True
    for i in range(0, len(walk) - 2, 2):
        e1, r, e2 = token_entity(walk[i]), walk[i + 1], token_entity(walk[i + 2])
        if e1 is None or e2 is None or not r.startswith("r"):
            return False
        if (int(r[1:]), e2) not in kg.out_edges.get(e1, ()):
            return False
    return True
