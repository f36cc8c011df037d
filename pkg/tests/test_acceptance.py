"""Acceptance suite: one test per criterion, each printing a pass line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  The end-to-end benchmark trains every model on the bundled synthetic
dataset once (session fixture) and is the slowest part, around half a minute.
"""

import json
import time

import numpy as np
import pytest
import scipy.stats

from grad_check import fd_check_instance
from naive_scoring import naive_score
from gdabench import pipeline
from gdabench import evaluate as ev
from gdabench.kg import EntityKind
from gdabench.lp import ModelKind, default_config, init_model, score_batch
from gdabench.pairs import load_predictions
from gdabench.split import GdaPair, generate_negatives, split_pairs
from gdabench.synth import generate_synthetic_dataset

ALL_KINDS = [k.value for k in ModelKind]


def _announce(name: str, detail: str = "") -> None:
    print(f"[PASS] {name}" + (f" — {detail}" if detail else ""))


# --- criterion 1: scoring-function oracle suite -------------------------------


def test_scoring_oracle_suite():
    started = time.perf_counter()
    n_triples = 1000
    worst = 0.0
    for kind in ALL_KINDS:
        for dim in (2, 8, 64):
            cfg = default_config(kind, dim=dim)
            rng = np.random.default_rng(dim * 1000 + hash(kind) % 97)
            model = init_model(40, 6, cfg, rng)
            for mat in model.all_params().values():
                mat += rng.normal(scale=0.5, size=mat.shape)
            hs = rng.integers(0, 40, size=n_triples)
            rs = rng.integers(0, 6, size=n_triples)
            ts = rng.integers(0, 40, size=n_triples)
            got = score_batch(model, hs, rs, ts)
            for i in range(n_triples):
                expect = naive_score(model, int(hs[i]), int(rs[i]), int(ts[i]))
                worst = max(worst, abs(got[i] - expect))
                assert abs(got[i] - expect) < 1e-9, (kind, dim, i)
    elapsed = time.perf_counter() - started
    assert elapsed < 10.0, f"oracle suite took {elapsed:.1f}s"
    _announce(
        "scoring oracle suite",
        f"6 models x dims (2,8,64) x {n_triples} triples, max abs dev {worst:.2e}, {elapsed:.1f}s",
    )


# --- criterion 2: algebraic reductions ----------------------------------------


def test_algebraic_reductions():
    rng = np.random.default_rng(7)
    worst = 0.0

    def check(dev):
        nonlocal worst
        worst = max(worst, dev)
        assert dev < 1e-9

    for _ in range(100):
        dim = int(rng.choice([4, 8, 16]))
        # ComplEx with zero imaginaries equals DistMult on the real parts
        cx = init_model(8, 3, default_config("complex", dim=dim), rng)
        cx.aux["ent_im"][:] = 0.0
        cx.aux["rel_im"][:] = 0.0
        dm = init_model(8, 3, default_config("distmult", dim=dim), rng)
        dm.entities = cx.entities
        dm.relations = cx.relations
        h, t = rng.integers(0, 8, size=2)
        r = rng.integers(0, 3)
        idx = (np.array([h]), np.array([r]), np.array([t]))
        check(abs(score_batch(cx, *idx)[0] - score_batch(dm, *idx)[0]))

        # TransD with zero projections equals the squared-l2 translation distance
        td = init_model(8, 3, default_config("transd", dim=dim), rng)
        td.aux["ent_proj"][:] = 0.0
        td.aux["rel_proj"][:] = 0.0
        diff = td.entities[h] + td.relations[r] - td.entities[t]
        check(abs(score_batch(td, *idx)[0] + float(diff @ diff)))

        # TransH with normals orthogonal to the entities reduces the same way
        th = init_model(8, 3, default_config("transh", dim=dim), rng)
        w = rng.normal(size=dim)
        w /= np.linalg.norm(w)
        th.aux["normals"][:] = w
        th.entities -= np.outer(th.entities @ w, w)
        diff = th.entities[h] + th.relations[r] - th.entities[t]
        check(abs(score_batch(th, *idx)[0] + float(diff @ diff)))
    _announce("algebraic reductions", f"100 instances each, max abs dev {worst:.2e}")


# --- criterion 3: gradient checks ----------------------------------------------


def test_gradient_checks():
    started = time.perf_counter()
    worst = 0.0
    for kind in ALL_KINDS:
        checked = 0
        seed = 0
        while checked < 50:
            seed += 1
            err = fd_check_instance(kind, seed, dim=8, eps=1e-5)
            if err is None:  # re-sample instances on the hinge kink
                continue
            checked += 1
            worst = max(worst, err)
            assert err < 1e-4, f"{kind} seed {seed}: relative error {err:.2e}"
    elapsed = time.perf_counter() - started
    assert elapsed < 30.0, f"gradient checks took {elapsed:.1f}s"
    _announce("gradient checks", f"50 instances x 6 models, worst rel err {worst:.2e}, {elapsed:.1f}s")


# --- criterion 4: hits@k against brute force ------------------------------------


def test_hits_at_k_oracle():
    rng = np.random.default_rng(23)
    for _ in range(200):
        n_candidates = int(rng.integers(1, 21))
        candidates = list(rng.choice(1000, size=n_candidates, replace=False))
        n_truths = int(rng.integers(1, 6))
        # roughly half the truths are planted inside the candidate list, the
        # rest are absent and must hit the penalty rank
        truths = set()
        for _ in range(n_truths):
            if rng.random() < 0.5 and candidates:
                truths.add(int(rng.choice(candidates)))
            else:
                truths.add(int(2000 + rng.integers(1000)))
        ranking = ev.UnifiedRanking(
            query=0,
            direction=ev.Direction.GENE_TO_DISEASE,
            candidates=tuple((int(e), float(-i)) for i, e in enumerate(candidates)),
            source="link_prediction",
            method="m",
        )
        records = ev.extract_ranks(ranking, truths)
        previous = 0.0
        for k in (1, 3, 10):
            got = ev.hits_at_k(records, k)
            # brute force: scan the list for each truth and count
            count = 0
            for truth in truths:
                position = None
                for i, e in enumerate(candidates):
                    if e == truth:
                        position = i + 1
                        break
                rank = position if position is not None else 1000
                if rank <= k:
                    count += 1
            assert got == pytest.approx(count / len(truths), abs=0)
            assert got >= previous  # monotone in k
            previous = got
        for record in records:
            if not record.found:
                assert record.rank == 1000
    _announce("hits@k brute-force oracle", "200 instances, exact match incl. penalty records")


# --- criterion 5: split reproduction --------------------------------------------


def test_split_reproduction():
    positives = [GdaPair(g, 100_000 + g % 911, True) for g in range(8189)]
    negatives = [GdaPair(g, 200_000 + g % 911, False) for g in range(8189)]
    split = split_pairs(positives + negatives, fraction=0.7, seed=5)
    assert len(split.train_pos) == 5732
    again = split_pairs(positives + negatives, fraction=0.7, seed=5)
    assert split == again
    assert sorted(split.train_pos + split.test_pos) == sorted(positives)
    assert sorted(split.train_neg + split.test_neg) == sorted(negatives)
    other = split_pairs(positives + negatives, fraction=0.7, seed=6)
    assert other != split and other.counts == split.counts
    _announce("split reproduction", "8189 positives at 0.7 -> 5732 train positives, deterministic")


# --- criterion 6 + 8: end-to-end synthetic benchmark -----------------------------


@pytest.fixture(scope="session")
def benchmark_run(tmp_path_factory):
    data_dir = tmp_path_factory.mktemp("bench_data")
    out_dir = tmp_path_factory.mktemp("bench_out")
    config_path = generate_synthetic_dataset(data_dir)
    config = pipeline.load_config(config_path)
    started = time.perf_counter()
    report = pipeline.run(config, out_dir)
    elapsed = time.perf_counter() - started
    return config, out_dir, report, elapsed


def test_synthetic_benchmark(benchmark_run):
    config, out_dir, report, elapsed = benchmark_run
    assert elapsed < 300.0, f"pipeline took {elapsed:.0f}s"
    variant = config.variants[0].tag
    baseline = report.baselines[variant][ev.Direction.GENE_TO_DISEASE.value]
    results = report.results[variant]
    lp_kinds = [m.kind.value for m in config.lp_models]
    lines = []
    for kind in lp_kinds:
        h10 = results[kind][ev.Direction.GENE_TO_DISEASE.value].hits10
        assert h10 >= 3 * baseline, f"{kind}: hits@10 {h10:.3f} < 3x baseline {3 * baseline:.3f}"
        lines.append(f"{kind}={h10:.3f}")
    clf = results["hadamard+gbt"][ev.Direction.GENE_TO_DISEASE.value]
    assert clf.hits10 >= 0.8

    # every true positive must receive a finite rank on the classification path
    data = pipeline.build_variant(config, config.variants[0], out_dir)
    rows = load_predictions(out_dir / "predictions" / variant / "hadamard_gbt.tsv", data.vocab)
    for direction in (ev.Direction.GENE_TO_DISEASE, ev.Direction.DISEASE_TO_GENE):
        truths = pipeline._query_truths(data.split, direction)
        for query, truth_set in truths.items():
            ranking = ev.unify_clf(rows, query, direction, "hadamard+gbt")
            assert all(r.found for r in ev.extract_ranks(ranking, truth_set))
    _announce(
        "synthetic benchmark",
        f"tail hits@10 [{', '.join(lines)}] vs 3x baseline {3 * baseline:.3f}; "
        f"clf hits@10 {clf.hits10:.3f}; {elapsed:.0f}s end to end",
    )


def test_case_study_format(benchmark_run):
    config, out_dir, report, _ = benchmark_run
    study, dest = pipeline.run_case_study(config, out_dir, ev.Direction.GENE_TO_DISEASE)
    data = pipeline.build_variant(config, config.variants[0], out_dir)
    truths = pipeline._query_truths(data.split, ev.Direction.GENE_TO_DISEASE)[study.query]
    assert len(study.rows) == len(truths)
    clf_columns = [i for i, m in enumerate(study.methods) if m == "hadamard+gbt"]
    assert clf_columns, "classification method missing from the table"
    for truth, ranks in study.rows:
        for i, rank in enumerate(ranks):
            if rank is None:
                assert i not in clf_columns, "penalty sentinel in a classification column"
            else:
                assert isinstance(rank, int) and rank >= 1
    text = dest.read_text().strip().splitlines()
    assert len(text) == len(truths) + 1  # header + one row per truth
    cells = [line.split("\t")[1:] for line in text[1:]]
    assert all(c == "-" or c.isdigit() for row in cells for c in row)
    _announce(
        "case-study format",
        f"{len(study.rows)} truths x {len(study.methods)} methods, "
        f"{sum(1 for row in cells for c in row if c == '-')} '-' sentinels (all in ranking columns)",
    )


# --- criterion 7: negative-sampling soundness ------------------------------------


def test_negative_sampling_soundness():
    rng = np.random.default_rng(99)
    all_genes = list(range(200))
    all_diseases = list(range(1000, 1100))
    positive_keys = set()
    while len(positive_keys) < 500:
        positive_keys.add((int(rng.choice(all_genes)), int(rng.choice(all_diseases))))
    positives = [GdaPair(g, d, True) for g, d in sorted(positive_keys)]
    negatives = generate_negatives(positives, 10_000, seed=17)
    assert len(negatives) == 10_000
    keys = {n.key for n in negatives}
    assert len(keys) == 10_000
    assert not (keys & positive_keys), "negative collided with a positive"

    # the sampler's universe is the entities occurring in positives; expected
    # per-entity counts are proportional to their non-positive partner counts
    genes = sorted({p.gene for p in positives})
    diseases = sorted({p.disease for p in positives})
    assert all(n.gene in set(genes) and n.disease in set(diseases) for n in negatives)
    pos_per_gene = {g: 0 for g in genes}
    pos_per_disease = {d: 0 for d in diseases}
    for g, d in positive_keys:
        pos_per_gene[g] += 1
        pos_per_disease[d] += 1
    feasible_total = len(genes) * len(diseases) - len(positive_keys)
    for entities, pos_counts, partner_count, picker in (
        (genes, pos_per_gene, len(diseases), lambda n: n.gene),
        (diseases, pos_per_disease, len(genes), lambda n: n.disease),
    ):
        observed = {e: 0 for e in entities}
        for n in negatives:
            observed[picker(n)] += 1
        obs = np.array([observed[e] for e in entities], dtype=float)
        expected = np.array(
            [10_000 * (partner_count - pos_counts[e]) / feasible_total for e in entities]
        )
        stat, p_value = scipy.stats.chisquare(obs, expected)
        assert p_value > 0.01, f"chi-square rejects uniformity (p={p_value:.4f})"
    _announce("negative sampling soundness", "10k negatives, 0 collisions, chi-square accepted")
