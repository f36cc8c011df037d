"""Negative pair generation and the stratified 70/30 train/test partition.

Both prediction tasks consume the same split.  Negatives are drawn uniformly
from the cross-product of genes and diseases occurring in the positive pairs,
excluding every known positive, so all sampled entities stay embeddable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import SplitError
from .kg import EntityKind, Vocabulary


@dataclass(frozen=True, order=True)
class GdaPair:
    gene: int
    disease: int
    positive: bool

    @property
    def key(self) -> tuple[int, int]:
        return (self.gene, self.disease)


@dataclass(frozen=True)
class SplitDataset:
    train_pos: tuple[GdaPair, ...]
    train_neg: tuple[GdaPair, ...]
    test_pos: tuple[GdaPair, ...]
    test_neg: tuple[GdaPair, ...]
    seed: int
    fraction: float

    def __post_init__(self) -> None:
        strata = (self.train_pos, self.train_neg, self.test_pos, self.test_neg)
        keys = [set(p.key for p in s) for s in strata]
        total = sum(len(k) for k in keys)
        if len(set().union(*keys)) != total:
            raise SplitError("split strata overlap as (gene, disease) sets")

    @property
    def counts(self) -> dict[str, int]:
        return {
            "train_pos": len(self.train_pos),
            "train_neg": len(self.train_neg),
            "test_pos": len(self.test_pos),
            "test_neg": len(self.test_neg),
        }

    def all_test_pairs(self) -> tuple[GdaPair, ...]:
        return self.test_pos + self.test_neg

    def test_entities(self, kind: EntityKind, vocab: Vocabulary) -> set[int]:
        """Entities of `kind` occurring in any test pair (positive or negative)."""
        out: set[int] = set()
        for p in self.all_test_pairs():
            eid = p.gene if kind is EntityKind.GENE else p.disease
            if vocab.kinds.get(eid) is kind:
                out.add(eid)
        return out


def generate_negatives(positives: Sequence[GdaPair], count: int, seed: int) -> list[GdaPair]:
    """Sample `count` distinct non-positive (gene, disease) pairs uniformly.

    Genes and diseases are the ones appearing in `positives`.  Deterministic
    under `seed`.  Raises when `count` exceeds the feasible pair count.
    """
    if count == 0:
        return []
    genes = sorted({p.gene for p in positives})
    diseases = sorted({p.disease for p in positives})
    pos_keys = {p.key for p in positives}
    feasible = len(genes) * len(diseases) - len(pos_keys)
    if count > feasible:
        raise SplitError(f"cannot draw {count} negatives; maximum feasible count is {feasible}")
    rng = np.random.default_rng(seed)
    chosen: list[GdaPair] = []
    taken: set[tuple[int, int]] = set()
    if count > 0.75 * feasible:
        # dense regime: enumerate the feasible pairs and choose without replacement
        all_pairs = [(g, d) for g in genes for d in diseases if (g, d) not in pos_keys]
        idx = rng.choice(len(all_pairs), size=count, replace=False)
        return [GdaPair(all_pairs[i][0], all_pairs[i][1], positive=False) for i in idx]
    while len(chosen) < count:
        n = max(64, count - len(chosen))
        gs = rng.integers(0, len(genes), size=n)
        ds = rng.integers(0, len(diseases), size=n)
        for gi, di in zip(gs, ds):
            key = (genes[gi], diseases[di])
            if key in pos_keys or key in taken:
                continue
            taken.add(key)
            chosen.append(GdaPair(key[0], key[1], positive=False))
            if len(chosen) == count:
                break
    return chosen


def split_pairs(pairs: Sequence[GdaPair], fraction: float, seed: int) -> SplitDataset:
    """Shuffle positives and negatives independently and cut at floor(fraction*n)."""
    if not 0.0 < fraction < 1.0:
        raise SplitError(f"fraction must be in (0, 1), got {fraction}")
    pos = [p for p in pairs if p.positive]
    neg = [p for p in pairs if not p.positive]
    if not pos or not neg:
        raise SplitError("both a positive and a negative stratum are required")
    rng = np.random.default_rng(seed)

    def cut(stratum: list[GdaPair]) -> tuple[tuple[GdaPair, ...], tuple[GdaPair, ...]]:
        order = rng.permutation(len(stratum))
        n_train = math.floor(fraction * len(stratum))
        shuffled = [stratum[i] for i in order]
        return tuple(shuffled[:n_train]), tuple(shuffled[n_train:])

    train_pos, test_pos = cut(pos)
    train_neg, test_neg = cut(neg)
    return SplitDataset(train_pos, train_neg, test_pos, test_neg, seed=seed, fraction=fraction)


# ---------------------------------------------------------------------------
# persistence: four TSVs (gene<TAB>disease<TAB>label) plus a JSON sidecar

_STRATA = ("train_pos", "train_neg", "test_pos", "test_neg")


def save_split(split: SplitDataset, vocab: Vocabulary, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in _STRATA:
        pairs: tuple[GdaPair, ...] = getattr(split, name)
        with open(out / f"{name}.tsv", "w", encoding="utf-8") as fh:
            for p in pairs:
                label = "positive" if p.positive else "negative"
                fh.write(f"{vocab.entity_name(p.gene)}\t{vocab.entity_name(p.disease)}\t{label}\n")
    sidecar = {"seed": split.seed, "fraction": split.fraction, "counts": split.counts}
    with open(out / "split.json", "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_split(in_dir: str | Path, vocab: Vocabulary) -> SplitDataset:
    """Load a persisted split, registering its entities in `vocab`."""
    src = Path(in_dir)
    with open(src / "split.json", encoding="utf-8") as fh:
        sidecar = json.load(fh)
    strata: dict[str, tuple[GdaPair, ...]] = {}
    for name in _STRATA:
        pairs = []
        with open(src / f"{name}.tsv", encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line:
                    continue
                gene, disease, label = line.split("\t")
                pairs.append(
                    GdaPair(
                        vocab.add_entity(gene, EntityKind.GENE),
                        vocab.add_entity(disease, EntityKind.DISEASE),
                        positive=(label == "positive"),
                    )
                )
        strata[name] = tuple(pairs)
    return SplitDataset(seed=sidecar["seed"], fraction=sidecar["fraction"], **strata)


def load_positive_pairs(path: str | Path, vocab: Vocabulary) -> list[GdaPair]:
    """Read a two-column ``gene<TAB>disease`` positives file."""
    pairs: list[GdaPair] = []
    seen: set[tuple[int, int]] = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            gene, disease = line.split("\t")[:2]
            pair = GdaPair(
                vocab.add_entity(gene, EntityKind.GENE),
                vocab.add_entity(disease, EntityKind.DISEASE),
                positive=True,
            )
            if pair.key not in seen:
                seen.add(pair.key)
                pairs.append(pair)
    return pairs
