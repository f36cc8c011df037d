import json
import shutil
from pathlib import Path

import pytest

from gdabench import cli, pipeline
from gdabench.errors import ConfigError
from gdabench.evaluate import Direction
from gdabench.kg import EntityKind
from gdabench.synth import SynthSpec, generate_synthetic_dataset


@pytest.fixture(scope="module")
def mini_dataset(tmp_path_factory):
    """A shrunk synthetic dataset with fast training settings."""
    root = tmp_path_factory.mktemp("mini")
    spec = SynthSpec(
        n_blocks=2,
        genes_per_block=4,
        diseases_per_block=3,
        classes_per_block=6,
        annotations_per_entity=3,
        min_assoc=1,
        max_assoc=2,
        seed=3,
    )
    config_path = generate_synthetic_dataset(root, spec)
    raw = json.loads(config_path.read_text())
    raw["lp"].update({"dim": 8, "epochs": 3, "nr_batches": 8})
    for model in raw["lp"]["models"]:
        model.pop("epochs", None)
        if model["kind"] == "transd":
            model["alpha"] = 0.001
    raw["walker"].update({"dim": 8, "walks_per_entity": 20, "epochs": 2})
    config_path.write_text(json.dumps(raw, indent=2))
    return config_path


@pytest.fixture(scope="module")
def mini_run(mini_dataset, tmp_path_factory):
    out = tmp_path_factory.mktemp("mini_out")
    config = pipeline.load_config(mini_dataset)
    report = pipeline.run(config, out)
    return config, out, report


def test_variant_tag_derivation():
    recipe = pipeline.VariantRecipe(("G", "H", "D"), ld=True, map=False,
                                    annotations_diseases_only=("H",))
    assert recipe.tag == "G+H*+D+L"
    assert pipeline.VariantRecipe(("G", "H")).tag == "G+H"


def test_report_structure(mini_run):
    config, out, report = mini_run
    variant = config.variants[0].tag
    methods = set(report.results[variant])
    assert methods == {m.kind.value for m in config.lp_models} | {"hadamard+gbt"}
    for by_dir in report.results[variant].values():
        assert set(by_dir) == {d.value for d in Direction}
        for scores in by_dir.values():
            assert 0.0 <= scores.hits1 <= scores.hits3 <= scores.hits10 <= 1.0
    assert report.provenance["config_digest"] == config.digest
    assert report.provenance["seed"] == config.seed
    timings = json.loads((out / "report" / "timings.json").read_text())
    assert any(key.startswith("train-lp") for key in timings)


def test_artifacts_on_disk(mini_run):
    config, out, report = mini_run
    variant = config.variants[0].tag
    assert (out / "split" / "split.json").exists()
    assert (out / "kg" / variant / "train2id.txt").exists()
    for model in config.lp_models:
        assert (out / "embeddings" / variant / f"{model.kind.value}.bin").exists()
    assert (out / "embeddings" / variant / "walk.bin").exists()
    assert (out / "predictions" / variant / "hadamard_gbt.tsv").exists()
    assert (out / "report" / "report.json").exists()
    assert (out / "report" / "timings.json").exists()


def test_rerun_is_byte_identical(mini_dataset, tmp_path):
    config = pipeline.load_config(mini_dataset)
    pipeline.run(config, tmp_path / "a")
    pipeline.run(config, tmp_path / "b")
    ra = (tmp_path / "a" / "report" / "report.json").read_bytes()
    rb = (tmp_path / "b" / "report" / "report.json").read_bytes()
    assert ra == rb


def test_stage_isolation(mini_dataset, tmp_path):
    # deleting downstream artifacts and rerunning rebuilds them without
    # touching the upstream split
    config = pipeline.load_config(mini_dataset)
    out = tmp_path / "run"
    pipeline.run(config, out)
    split_bytes = (out / "split" / "train_pos.tsv").read_bytes()
    split_mtime = (out / "split" / "train_pos.tsv").stat().st_mtime_ns
    shutil.rmtree(out / "embeddings")
    shutil.rmtree(out / "predictions")
    pipeline.run(config, out)
    assert (out / "embeddings").exists() and (out / "predictions").exists()
    assert (out / "split" / "train_pos.tsv").read_bytes() == split_bytes
    assert (out / "split" / "train_pos.tsv").stat().st_mtime_ns == split_mtime


def test_kg_difference_is_training_edges(mini_dataset, tmp_path):
    config = pipeline.load_config(mini_dataset)
    pipeline.stage_split(config, tmp_path)
    data = pipeline.build_variant(config, config.variants[0], tmp_path)
    diff = set(data.kg_lp.triples) - set(data.kg_clf.triples)
    assoc = data.vocab.relation_id("association")
    assert len(diff) == len(data.split.train_pos)
    assert all(r == assoc for _, r, _ in diff)
    assert set(data.kg_clf.triples) <= set(data.kg_lp.triples)


def test_star_variant_drops_gene_annotations_of_that_source(mini_dataset, tmp_path):
    config = pipeline.load_config(mini_dataset)
    pipeline.stage_split(config, tmp_path)

    def gene_o2_edges(data):
        vocab = data.vocab
        rid = vocab.relation_id("hasAnnotation_O2")
        return [
            t
            for t in data.kg_clf.triples
            if t.relation == rid and vocab.kinds[t.head] is EntityKind.GENE
        ]

    plain = pipeline.build_variant(config, config.variants[0], tmp_path)
    assert gene_o2_edges(plain)
    starred = pipeline.VariantRecipe(("O1", "O2"), ld=True, map=True,
                                     annotations_diseases_only=("O2",))
    data = pipeline.build_variant(config, starred, tmp_path)
    assert data.recipe.tag == "O1+O2*+L+M"
    assert gene_o2_edges(data) == []
    # genes keep their first-hierarchy annotations, so the graph stays usable
    assert data.kg_lp.stats().n_gene_annotated == plain.kg_lp.stats().n_gene_annotated


def test_lock_excludes_second_writer(mini_dataset, tmp_path):
    config = pipeline.load_config(mini_dataset)
    out = tmp_path / "locked"
    out.mkdir()
    (out / ".lock").write_text("pid 0\n")
    with pytest.raises(ConfigError, match="lock"):
        pipeline.run(config, out)


def test_validate_clean_and_missing_file(mini_dataset):
    config = pipeline.load_config(mini_dataset)
    assert pipeline.validate(config) == []
    broken = pipeline.load_config(mini_dataset)
    broken.annotations[0] = {**broken.annotations[0], "path": "nope.tsv"}
    problems = pipeline.validate(broken)
    assert any("nope.tsv" in p for p in problems)


def test_validate_detects_dim_mismatch(mini_run, mini_dataset):
    config, out, _ = mini_run
    raw = json.loads(Path(mini_dataset).read_text())
    raw["lp"]["dim"] = 99
    moved = Path(mini_dataset).parent / "config_dim99.json"
    moved.write_text(json.dumps(raw))
    changed = pipeline.load_config(moved)
    problems = pipeline.validate(changed, out_dir=out)
    assert any("dim" in p for p in problems)


def test_validate_infeasible_negatives(mini_dataset, tmp_path):
    raw = json.loads(Path(mini_dataset).read_text())
    raw["split"]["negatives"] = 10_000_000
    path = tmp_path / "config.json"
    for name in ("positives.tsv",):
        shutil.copy(Path(mini_dataset).parent / name, tmp_path / name)
    for entry in raw["data"]["ontologies"]:
        shutil.copy(Path(mini_dataset).parent / entry["triples"], tmp_path / entry["triples"])
    for entry in raw["data"]["annotations"]:
        shutil.copy(Path(mini_dataset).parent / entry["path"], tmp_path / entry["path"])
    for key in ("logical_definitions", "ontology_mappings"):
        shutil.copy(Path(mini_dataset).parent / raw["data"][key], tmp_path / raw["data"][key])
    path.write_text(json.dumps(raw))
    problems = pipeline.validate(pipeline.load_config(path))
    assert any("infeasible" in p for p in problems)


def test_case_study_pipeline(mini_run):
    config, out, _ = mini_run
    study, dest = pipeline.run_case_study(config, out, Direction.GENE_TO_DISEASE)
    assert dest.exists()
    clf_column = study.methods.index("hadamard+gbt")
    assert all(ranks[clf_column] is not None for _, ranks in study.rows)


# --- CLI ----------------------------------------------------------------------


def test_cli_validate_and_run(mini_dataset, tmp_path, capsys):
    out = tmp_path / "cli_out"
    assert cli.main(["validate", "--config", str(mini_dataset), "--out", str(out)]) == 0
    assert cli.main(["run", "--config", str(mini_dataset), "--out", str(out)]) == 0
    captured = capsys.readouterr().out
    assert '"results"' in captured
    assert (out / "report" / "report.json").exists()


def test_cli_stagewise(mini_dataset, tmp_path, capsys):
    out = tmp_path / "stages"
    for args in (
        ["split", "--config", str(mini_dataset), "--out", str(out)],
        ["build-kg", "--config", str(mini_dataset), "--out", str(out)],
        ["train-lp", "--config", str(mini_dataset), "--out", str(out), "--model", "transe"],
        ["train-walks", "--config", str(mini_dataset), "--out", str(out)],
        ["classify", "--config", str(mini_dataset), "--out", str(out)],
        ["case-study", "--config", str(mini_dataset), "--out", str(out)],
    ):
        assert cli.main(args) == 0, args
    assert cli.main(["build-kg", "--config", str(mini_dataset), "--out", str(out),
                     "--variant", "missing"]) == 1
    err = capsys.readouterr().err
    assert "unknown variant" in err


def test_cli_validate_fails_on_missing_file(tmp_path, capsys):
    config = {"data": {"positive_pairs": "does_not_exist.tsv"},
              "variants": [{"ontologies": []}]}
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(config))
    assert cli.main(["validate", "--config", str(path), "--out", str(tmp_path / "o")]) == 1


def test_make_synthetic_command(tmp_path):
    assert cli.main(["make-synthetic", "--out", str(tmp_path / "data")]) == 0
    assert (tmp_path / "data" / "config.json").exists()
