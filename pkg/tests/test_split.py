import math

import pytest

from gdabench.errors import SplitError
from gdabench.kg import EntityKind, Vocabulary
from gdabench.split import (
    GdaPair,
    generate_negatives,
    load_split,
    save_split,
    split_pairs,
)


def make_pairs(n_genes, n_diseases, positive_keys):
    return [GdaPair(g, 1000 + d, True) for g, d in positive_keys]


def test_generate_negatives_only_remaining_pair():
    positives = [GdaPair(0, 100, True)]
    # one gene, one disease -> zero feasible pairs; add a second disease
    positives = [GdaPair(0, 100, True), GdaPair(0, 101, True)]
    with pytest.raises(SplitError, match="maximum feasible count is 0"):
        generate_negatives(positives, 1, seed=0)
    positives = [GdaPair(0, 100, True), GdaPair(1, 101, True)]
    negs = generate_negatives(positives, 2, seed=0)
    assert {n.key for n in negs} == {(0, 101), (1, 100)}
    assert all(not n.positive for n in negs)


def test_generate_negatives_count_zero():
    assert generate_negatives([GdaPair(0, 10, True)], 0, seed=1) == []


def test_generate_negatives_no_collision_and_distinct():
    positives = [
        GdaPair(g, 100 + d, True) for g in range(30) for d in range(20) if (g + d) % 6 == 0
    ]
    pos_keys = {p.key for p in positives}
    negs = generate_negatives(positives, 300, seed=42)
    assert len(negs) == 300
    keys = [n.key for n in negs]
    # oracle: exhaustive membership test, intersection with positives is empty
    assert not (set(keys) & pos_keys)
    assert len(set(keys)) == len(keys)
    genes = {p.gene for p in positives}
    diseases = {p.disease for p in positives}
    assert all(k[0] in genes and k[1] in diseases for k in keys)


def test_generate_negatives_deterministic():
    positives = [GdaPair(g, 100 + d, True) for g in range(10) for d in range(8) if (g + d) % 2]
    a = generate_negatives(positives, 12, seed=7)
    b = generate_negatives(positives, 12, seed=7)
    assert a == b
    c = generate_negatives(positives, 12, seed=8)
    assert a != c


def test_split_floor_arithmetic():
    pos = [GdaPair(g, 100 + g, True) for g in range(10)]
    neg = [GdaPair(g, 200 + g, False) for g in range(10)]
    ds = split_pairs(pos + neg, fraction=0.7, seed=3)
    assert ds.counts == {"train_pos": 7, "train_neg": 7, "test_pos": 3, "test_neg": 3}


def test_split_paper_scale_counts():
    pos = [GdaPair(g, 100000 + g, True) for g in range(8189)]
    neg = [GdaPair(g, 200000 + g, False) for g in range(8189)]
    ds = split_pairs(pos + neg, fraction=0.7, seed=11)
    assert len(ds.train_pos) == 5732
    assert len(ds.train_pos) == math.floor(0.7 * 8189)


def test_split_partition_and_determinism():
    pos = [GdaPair(g, 100 + g % 7, True) for g in range(25)]
    neg = [GdaPair(g + 50, 100 + g % 7, False) for g in range(13)]
    a = split_pairs(pos + neg, 0.7, seed=5)
    b = split_pairs(pos + neg, 0.7, seed=5)
    assert a == b
    assert sorted(a.train_pos + a.test_pos) == sorted(pos)
    assert sorted(a.train_neg + a.test_neg) == sorted(neg)
    c = split_pairs(pos + neg, 0.7, seed=6)
    assert c != a
    assert c.counts == a.counts


def test_split_errors():
    pos = [GdaPair(0, 100, True)]
    with pytest.raises(SplitError):
        split_pairs(pos, 0.7, seed=1)  # missing negative stratum
    neg = [GdaPair(1, 100, False)]
    with pytest.raises(SplitError):
        split_pairs(pos + neg, 1.2, seed=1)


def test_split_round_trip(tmp_path):
    vocab = Vocabulary()
    pos = [GdaPair(vocab.add_entity(f"g{i}", EntityKind.GENE), vocab.add_entity(f"d{i}", EntityKind.DISEASE), True) for i in range(10)]
    neg = generate_negatives(pos, 10, seed=2)
    ds = split_pairs(pos + neg, 0.7, seed=2)
    save_split(ds, vocab, tmp_path)
    fresh_vocab = Vocabulary()
    loaded = load_split(tmp_path, fresh_vocab)
    assert loaded.counts == ds.counts
    assert loaded.fraction == ds.fraction and loaded.seed == ds.seed
    # identical pairs modulo the new vocabulary's ids
    orig = {(vocab.entity_name(p.gene), vocab.entity_name(p.disease)) for p in ds.train_pos}
    back = {(fresh_vocab.entity_name(p.gene), fresh_vocab.entity_name(p.disease)) for p in loaded.train_pos}
    assert orig == back
