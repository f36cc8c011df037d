"""Synthetic planted-structure benchmark data.

Two small class hierarchies stand in for the real ontologies.  Genes and
diseases are grouped into blocks; entities of one block draw their
annotations from that block's classes, cross-hierarchy links join matching
blocks, and the positive associations connect genes and diseases of the same
block.  A pipeline that learns anything useful must recover this block
structure, which is what the end-to-end benchmark checks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class SynthSpec:
    n_blocks: int = 5
    genes_per_block: int = 12
    diseases_per_block: int = 8
    classes_per_block: int = 18
    annotations_per_entity: int = 8
    min_assoc: int = 3
    max_assoc: int = 6
    links_per_block: int = 2
    seed: int = 7


def _hierarchy_lines(prefix: str, spec: SynthSpec) -> list[str]:
    lines = []
    for b in range(spec.n_blocks):
        lines.append(f"{prefix}:b{b}\tsubclassOf\t{prefix}:root")
        for k in range(spec.classes_per_block):
            parent = f"{prefix}:b{b}" if k == 0 else f"{prefix}:b{b}c{(k - 1) // 2}"
            lines.append(f"{prefix}:b{b}c{k}\tsubclassOf\t{parent}")
    return lines


def generate_synthetic_dataset(out_dir: str | Path, spec: SynthSpec = SynthSpec()) -> Path:
    """Write the data files plus a ready-to-run experiment config; returns the config path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(spec.seed)

    (out / "o1_triples.tsv").write_text("\n".join(_hierarchy_lines("o1", spec)) + "\n")
    (out / "o2_triples.tsv").write_text("\n".join(_hierarchy_lines("o2", spec)) + "\n")

    def annotate(prefix: str, onto: str, count: int, per_block: int, n_terms: int) -> list[str]:
        lines = []
        for i in range(count):
            block = i // per_block
            terms = rng.choice(spec.classes_per_block, size=n_terms, replace=False)
            term_names = " ".join(f"{onto}:b{block}c{k}" for k in sorted(terms))
            lines.append(f"{prefix}{i}\t{term_names}")
        return lines

    n_genes = spec.n_blocks * spec.genes_per_block
    n_diseases = spec.n_blocks * spec.diseases_per_block
    per_entity = spec.annotations_per_entity
    # genes carry annotations from both hierarchies (like the disease one
    # describing gene phenotypes); diseases only from the second
    (out / "gene_annotations.tsv").write_text(
        "\n".join(annotate("gene:g", "o1", n_genes, spec.genes_per_block, per_entity)) + "\n"
    )
    (out / "gene_annotations_o2.tsv").write_text(
        "\n".join(annotate("gene:g", "o2", n_genes, spec.genes_per_block, per_entity // 2)) + "\n"
    )
    (out / "disease_annotations.tsv").write_text(
        "\n".join(annotate("disease:d", "o2", n_diseases, spec.diseases_per_block, per_entity)) + "\n"
    )

    ld, mp = [], []
    for b in range(spec.n_blocks):
        for k in range(spec.links_per_block):
            ld.append(f"o1:b{b}c{k}\to2:b{b}c{k}")
            mp.append(f"o1:b{b}c{k + spec.links_per_block}\to2:b{b}c{k + spec.links_per_block}")
    (out / "ld.tsv").write_text("\n".join(ld) + "\n")
    (out / "map.tsv").write_text("\n".join(mp) + "\n")

    positives = []
    for i in range(n_genes):
        block = i // spec.genes_per_block
        n_assoc = int(rng.integers(spec.min_assoc, spec.max_assoc + 1))
        partners = rng.choice(spec.diseases_per_block, size=n_assoc, replace=False)
        for d in sorted(partners):
            positives.append(f"gene:g{i}\tdisease:d{block * spec.diseases_per_block + d}")
    (out / "positives.tsv").write_text("\n".join(positives) + "\n")

    config = {
        "name": "synthetic-blocks",
        "seed": spec.seed,
        "data": {
            "ontologies": [
                {"tag": "O1", "triples": "o1_triples.tsv"},
                {"tag": "O2", "triples": "o2_triples.tsv"},
            ],
            "annotations": [
                {"path": "gene_annotations.tsv", "kind": "gene", "source": "O1"},
                {"path": "gene_annotations_o2.tsv", "kind": "gene", "source": "O2"},
                {"path": "disease_annotations.tsv", "kind": "disease", "source": "O2"},
            ],
            "logical_definitions": "ld.tsv",
            "ontology_mappings": "map.tsv",
            "positive_pairs": "positives.tsv",
        },
        "split": {"fraction": 0.7, "negatives": "match_positives"},
        "variants": [
            {"ontologies": ["O1", "O2"], "ld": True, "map": True, "annotations_diseases_only": []}
        ],
        "task": "both",
        "directions": ["gene_to_disease", "disease_to_gene"],
        "lp": {
            # desk-scale settings: the stock learning rates are tuned for
            # graphs five orders of magnitude larger and underfit this one
            "dim": 24,
            "epochs": 100,
            "nr_batches": 100,
            "models": [
                {"kind": "transe", "alpha": 0.1, "epochs": 200},
                {"kind": "transd", "alpha": 0.01},
                {"kind": "transh", "alpha": 0.2},
                {"kind": "distmult", "l2_lambda": 0.01},
                {"kind": "hole", "alpha": 1.0, "margin": 1.0, "entity_negative_rate": 4},
                {"kind": "complex", "l2_lambda": 0.01},
            ],
        },
        "walker": {
            "dim": 64,
            "walks_per_entity": 200,
            "max_walk_length": 8,
            "epochs": 5,
            "min_count": 1,
            "sample": 0.001,
        },
        "classifiers": [{"operator": "hadamard", "kind": "gbt"}],
        "eval": {"lp_top_k": None, "case_study_lp_top_k": 10},
    }
    config_path = out / "config.json"
    config_path.write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")
    return config_path
