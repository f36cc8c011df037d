"""Config-driven orchestration: split, assemble, embed, predict, evaluate.

Artifacts land under the output directory:

    split/         four split TSVs + JSON sidecar
    kg/<variant>/  numeric export of the link-prediction graph
    embeddings/<variant>/<model>.bin(.json)   trained parameters
    predictions/<variant>/<operator>_<classifier>.tsv
    report/        report.json, flat hits TSVs, timings.json

Heavy stages (embedding training, walks, classification) are cached through
content digests of their inputs; rerunning with identical inputs reuses them and
leaves upstream artifacts untouched.  In deterministic mode (single worker
everywhere) a rerun writes a byte-identical report; wall-clock timings go to
a separate timings.json so they never perturb the report itself.
"""

from __future__ import annotations

import contextlib
import hashlib
import json
import os
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import evaluate as ev
from . import kg as kgmod
from . import pairs as pairsmod
from .errors import ConfigError, ConsistencyError, EvalError
from .kg import ASSOCIATION_RELATION, EntityKind, KnowledgeGraph, Vocabulary
from .lp import ModelConfig, ModelKind, PredictDirection, default_config, rank_candidates, train
from .lp.io import load_entity_table, load_model, save_entity_table, save_model
from .lp.ranking import filter_by_kind
from .skipgram import train_skipgram
from .split import SplitDataset, generate_negatives, load_positive_pairs, load_split, save_split, split_pairs
from .walks import WalkConfig, generate_walks, save_corpus


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class VariantRecipe:
    ontologies: tuple[str, ...]
    ld: bool = False
    map: bool = False
    annotations_diseases_only: tuple[str, ...] = ()

    @property
    def tag(self) -> str:
        parts = [
            f"{tag}*" if tag in self.annotations_diseases_only else tag for tag in self.ontologies
        ]
        if self.ld:
            parts.append("L")
        if self.map:
            parts.append("M")
        return "+".join(parts)


@dataclass(frozen=True)
class ClassifierRecipe:
    operator: pairsmod.AggregationOp
    kind: pairsmod.ClassifierKind

    @property
    def tag(self) -> str:
        return f"{self.operator.value}+{self.kind.value}"


@dataclass
class ExperimentConfig:
    name: str
    seed: int
    base_dir: Path
    ontologies: list[dict]
    annotations: list[dict]
    logical_definitions: Path | None
    ontology_mappings: Path | None
    positive_pairs: Path
    split_fraction: float
    negatives: int | str
    variants: list[VariantRecipe]
    task: str
    directions: list[ev.Direction]
    lp_models: list[ModelConfig]
    walker: WalkConfig
    classifiers: list[ClassifierRecipe]
    lp_top_k: int | None
    case_study_lp_top_k: int | None
    deterministic: bool = True
    raw: dict = field(default_factory=dict)

    @property
    def digest(self) -> str:
        return hashlib.sha256(
            json.dumps(self.raw, sort_keys=True).encode("utf-8")
        ).hexdigest()[:16]


def load_config(path: str | Path, deterministic: bool = True, seed: int | None = None) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    base = path.parent

    def resolve(rel: str | None) -> Path | None:
        return (base / rel) if rel else None

    data = raw.get("data", {})
    master_seed = seed if seed is not None else int(raw.get("seed", 1))

    lp_section = raw.get("lp", {})
    shared = {
        k: lp_section[k] for k in ("dim", "epochs", "nr_batches", "workers") if k in lp_section
    }
    models = []
    for entry in lp_section.get("models", [{"kind": k.value} for k in ModelKind]):
        entry = dict(entry)
        kind = entry.pop("kind")
        overrides = {**shared, **entry}
        overrides.setdefault("seed", master_seed)
        models.append(default_config(kind, **overrides))

    walker_kwargs = dict(raw.get("walker", {}))
    walker_kwargs.setdefault("seed", master_seed)
    walker = WalkConfig(**walker_kwargs)

    classifiers = [
        ClassifierRecipe(
            operator=pairsmod.AggregationOp(c.get("operator", "hadamard")),
            kind=pairsmod.ClassifierKind(c.get("kind", "gbt")),
        )
        for c in raw.get("classifiers", [{"operator": "hadamard", "kind": "gbt"}])
    ]

    variants = [
        VariantRecipe(
            ontologies=tuple(v["ontologies"]),
            ld=bool(v.get("ld", False)),
            map=bool(v.get("map", False)),
            annotations_diseases_only=tuple(v.get("annotations_diseases_only", ())),
        )
        for v in raw.get("variants", [])
    ]
    if not variants:
        raise ConfigError("config lists no graph variants")

    split_section = raw.get("split", {})
    eval_section = raw.get("eval", {})
    directions = [ev.Direction(d) for d in raw.get("directions", [d.value for d in ev.Direction])]

    return ExperimentConfig(
        name=str(raw.get("name", path.stem)),
        seed=master_seed,
        base_dir=base,
        ontologies=data.get("ontologies", []),
        annotations=data.get("annotations", []),
        logical_definitions=resolve(data.get("logical_definitions")),
        ontology_mappings=resolve(data.get("ontology_mappings")),
        positive_pairs=resolve(data.get("positive_pairs")) or (base / "positives.tsv"),
        split_fraction=float(split_section.get("fraction", 0.7)),
        negatives=split_section.get("negatives", "match_positives"),
        variants=variants,
        task=raw.get("task", "both"),
        directions=directions,
        lp_models=models,
        walker=walker,
        classifiers=classifiers,
        lp_top_k=eval_section.get("lp_top_k"),
        case_study_lp_top_k=eval_section.get("case_study_lp_top_k", 10),
        deterministic=deterministic,
        raw=raw,
    )


# ---------------------------------------------------------------------------
# digests, caching, locking


def _digest(*parts: bytes | str) -> str:
    h = hashlib.sha256()
    for part in parts:
        h.update(part.encode("utf-8") if isinstance(part, str) else part)
        h.update(b"\x00")
    return h.hexdigest()


def _file_bytes(path: Path | None) -> bytes:
    return path.read_bytes() if path is not None and path.exists() else b""


def _cached(marker: Path, digest: str) -> bool:
    return marker.exists() and marker.read_text().strip() == digest


def _mark(marker: Path, digest: str) -> None:
    marker.write_text(digest + "\n")


@contextlib.contextmanager
def output_lock(out_dir: Path):
    out_dir.mkdir(parents=True, exist_ok=True)
    lock = out_dir / ".lock"
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise ConfigError(f"another run holds {lock}; remove it if stale") from None
    try:
        os.write(fd, f"pid {os.getpid()}\n".encode())
        os.close(fd)
        yield
    finally:
        lock.unlink(missing_ok=True)


class StageTimer:
    def __init__(self) -> None:
        self.timings: dict[str, float] = {}

    @contextlib.contextmanager
    def stage(self, name: str):
        start = time.perf_counter()
        yield
        self.timings[name] = self.timings.get(name, 0.0) + time.perf_counter() - start


# ---------------------------------------------------------------------------
# stages


def stage_split(config: ExperimentConfig, out_dir: Path) -> None:
    """Materialize the persisted split (cached by positives + split settings)."""
    split_dir = out_dir / "split"
    digest = _digest(
        _file_bytes(config.positive_pairs),
        json.dumps(
            {"fraction": config.split_fraction, "negatives": config.negatives, "seed": config.seed},
            sort_keys=True,
        ),
    )
    marker = split_dir / ".digest"
    if _cached(marker, digest):
        return
    vocab = Vocabulary()
    positives = load_positive_pairs(config.positive_pairs, vocab)
    count = len(positives) if config.negatives == "match_positives" else int(config.negatives)
    negatives = generate_negatives(positives, count, seed=config.seed)
    split = split_pairs(positives + negatives, config.split_fraction, seed=config.seed)
    save_split(split, vocab, split_dir)
    _mark(marker, digest)


@dataclass
class VariantData:
    recipe: VariantRecipe
    vocab: Vocabulary
    kg_lp: KnowledgeGraph
    kg_clf: KnowledgeGraph
    split: SplitDataset


def build_variant(config: ExperimentConfig, recipe: VariantRecipe, out_dir: Path) -> VariantData:
    """Assemble both graph flavours of one variant and export the numeric files."""
    vocab = Vocabulary()
    onto_triples = []
    selected = set(recipe.ontologies)
    for entry in config.ontologies:
        if entry["tag"] in selected:
            onto_triples.extend(kgmod.load_triples(config.base_dir / entry["triples"], vocab))
    annotations = []
    for entry in config.annotations:
        if entry["source"] not in selected:
            continue
        kind = EntityKind(entry["kind"])
        if entry["source"] in recipe.annotations_diseases_only and kind is EntityKind.GENE:
            continue
        annotations.append(
            kgmod.load_annotations(config.base_dir / entry["path"], kind, vocab, entry["source"])
        )
    links = []
    if recipe.ld and config.logical_definitions:
        links.extend(kgmod.load_links(config.logical_definitions, vocab, kgmod.LD_RELATION))
    if recipe.map and config.ontology_mappings:
        links.extend(kgmod.load_links(config.ontology_mappings, vocab, kgmod.MAP_RELATION))
    split = load_split(out_dir / "split", vocab)
    kg_clf = kgmod.assemble_kg(onto_triples, annotations, links, vocab, variant=recipe.tag)
    kg_lp = kgmod.assemble_kg(
        onto_triples, annotations, links, vocab, training_edges=split.train_pos, variant=recipe.tag
    )
    kg_dir = out_dir / "kg" / recipe.tag
    kg_dir.mkdir(parents=True, exist_ok=True)
    kgmod.export_numeric(kg_lp, split, kg_dir)
    stats_path = kg_dir / "stats.json"
    stats_path.write_text(
        json.dumps({"lp": kg_lp.stats().__dict__, "clf": kg_clf.stats().__dict__}, indent=2, sort_keys=True)
        + "\n"
    )
    return VariantData(recipe=recipe, vocab=vocab, kg_lp=kg_lp, kg_clf=kg_clf, split=split)


def _kg_digest(kg: KnowledgeGraph) -> str:
    return _digest(np.asarray(sorted(kg.triples), dtype=np.int64).tobytes())


def stage_train_lp(config: ExperimentConfig, data: VariantData, model_cfg: ModelConfig, out_dir: Path):
    emb_dir = out_dir / "embeddings" / data.recipe.tag
    emb_dir.mkdir(parents=True, exist_ok=True)
    path = emb_dir / f"{model_cfg.kind.value}.bin"
    if config.deterministic and model_cfg.workers > 1:
        model_cfg = replace(model_cfg, workers=1)
    digest = _digest(_kg_digest(data.kg_lp), json.dumps(model_cfg.__dict__, sort_keys=True, default=str))
    marker = emb_dir / f".{model_cfg.kind.value}.digest"
    if _cached(marker, digest) and path.exists():
        return load_model(path)
    result = train(data.kg_lp, model_cfg)
    save_model(result.model, model_cfg, path)
    _mark(marker, digest)
    # reload so cached and fresh paths expose identical float32 parameters
    return load_model(path)


def stage_walk_table(config: ExperimentConfig, data: VariantData, out_dir: Path) -> dict[int, np.ndarray]:
    emb_dir = out_dir / "embeddings" / data.recipe.tag
    emb_dir.mkdir(parents=True, exist_ok=True)
    path = emb_dir / "walk.bin"
    walker = config.walker
    if config.deterministic and walker.workers > 1:
        walker = replace(walker, workers=1)
    digest = _digest(_kg_digest(data.kg_clf), json.dumps(walker.__dict__, sort_keys=True))
    marker = emb_dir / ".walk.digest"
    if _cached(marker, digest) and path.exists():
        return load_entity_table(path)
    seeds = set(data.vocab.entities_of_kind(EntityKind.GENE)) | set(
        data.vocab.entities_of_kind(EntityKind.DISEASE)
    )
    corpus = generate_walks(data.kg_clf, seeds, walker)
    save_corpus(corpus, emb_dir / "walks.txt")
    table = train_skipgram(corpus, walker, seeds)
    save_entity_table(table, walker.__dict__, path)
    _mark(marker, digest)
    return load_entity_table(path)


def stage_classify(
    config: ExperimentConfig,
    data: VariantData,
    table: dict[int, np.ndarray],
    out_dir: Path,
) -> dict[str, list[pairsmod.PredictionRow]]:
    pred_dir = out_dir / "predictions" / data.recipe.tag
    pred_dir.mkdir(parents=True, exist_ok=True)
    split = data.split
    train_pairs = list(split.train_pos + split.train_neg)
    test_pairs = list(split.all_test_pairs())
    outputs: dict[str, list[pairsmod.PredictionRow]] = {}
    table_digest = _digest(
        *(f"{e}:{table[e].tobytes().hex()}" for e in sorted(table)),
        _file_bytes(out_dir / "split" / ".digest"),
    )
    for recipe in config.classifiers:
        path = pred_dir / f"{recipe.operator.value}_{recipe.kind.value}.tsv"
        marker = pred_dir / f".{recipe.operator.value}_{recipe.kind.value}.digest"
        digest = _digest(table_digest, recipe.tag, str(config.seed))
        if _cached(marker, digest) and path.exists():
            outputs[recipe.tag] = pairsmod.load_predictions(path, data.vocab)
            continue
        spec = pairsmod.default_spec(recipe.kind, seed=config.seed)
        feats_train = pairsmod.build_pair_features(train_pairs, table, recipe.operator)
        feats_test = pairsmod.build_pair_features(test_pairs, table, recipe.operator)
        clf = pairsmod.fit(spec, feats_train)
        rows = pairsmod.predict_pairs(clf, feats_test)
        pairsmod.save_predictions(rows, data.vocab, path)
        _mark(marker, digest)
        outputs[recipe.tag] = rows
    return outputs


def _query_truths(split: SplitDataset, direction: ev.Direction) -> dict[int, set[int]]:
    truths: dict[int, set[int]] = {}
    for p in split.test_pos:
        if direction is ev.Direction.GENE_TO_DISEASE:
            truths.setdefault(p.gene, set()).add(p.disease)
        else:
            truths.setdefault(p.disease, set()).add(p.gene)
    return truths


def _target_kind(direction: ev.Direction) -> EntityKind:
    return EntityKind.DISEASE if direction is ev.Direction.GENE_TO_DISEASE else EntityKind.GENE


def lp_unified_rankings(
    model,
    model_tag: str,
    data: VariantData,
    direction: ev.Direction,
    top_k: int | None = None,
) -> dict[int, ev.UnifiedRanking]:
    """Full-graph ranking, kind filter, then the test-set restriction, per query."""
    vocab = data.vocab
    assoc = vocab.relation_id(ASSOCIATION_RELATION)
    kind = _target_kind(direction)
    test_entities = data.split.test_entities(kind, vocab)
    predict = (
        PredictDirection.PREDICT_TAIL
        if direction is ev.Direction.GENE_TO_DISEASE
        else PredictDirection.PREDICT_HEAD
    )
    all_entities = np.arange(vocab.num_entities)
    out: dict[int, ev.UnifiedRanking] = {}
    for query in sorted(_query_truths(data.split, direction)):
        pool = all_entities[all_entities != query]
        ranking = rank_candidates(model, query, assoc, predict, pool)
        ranking = filter_by_kind(ranking, vocab.kinds, kind)
        out[query] = ev.unify_lp(ranking, test_entities, direction, model_tag, top_k=top_k)
    return out


def clf_unified_rankings(
    rows: list[pairsmod.PredictionRow],
    method_tag: str,
    data: VariantData,
    direction: ev.Direction,
) -> dict[int, ev.UnifiedRanking]:
    out: dict[int, ev.UnifiedRanking] = {}
    for query in sorted(_query_truths(data.split, direction)):
        out[query] = ev.unify_clf(rows, query, direction, method_tag)
    return out


def _score_method(
    rankings: dict[int, ev.UnifiedRanking], truths: dict[int, set[int]]
) -> tuple[ev.MethodScores, list[int]]:
    records, counts = [], []
    for query, ranking in rankings.items():
        recs = ev.extract_ranks(ranking, truths[query])
        records.extend(recs)
        counts.extend([len(ranking.candidates)] * len(recs))
    return ev.score_records(records), counts


def run(config: ExperimentConfig, out_dir: str | Path) -> ev.EvalReport:
    """Execute the five-step pipeline and write all artifacts plus the report."""
    out = Path(out_dir)
    timer = StageTimer()
    with output_lock(out):
        with timer.stage("split"):
            stage_split(config, out)
        report = ev.EvalReport()
        report.provenance = {
            "config_digest": config.digest,
            "name": config.name,
            "seed": config.seed,
            "deterministic": config.deterministic,
        }
        for recipe in config.variants:
            with timer.stage(f"build-kg:{recipe.tag}"):
                data = build_variant(config, recipe, out)
            models = {}
            if config.task in ("link_prediction", "both"):
                for model_cfg in config.lp_models:
                    with timer.stage(f"train-lp:{recipe.tag}:{model_cfg.kind.value}"):
                        models[model_cfg.kind.value] = stage_train_lp(config, data, model_cfg, out)
            predictions: dict[str, list[pairsmod.PredictionRow]] = {}
            if config.task in ("node_pair_classification", "both"):
                with timer.stage(f"train-walks:{recipe.tag}"):
                    table = stage_walk_table(config, data, out)
                with timer.stage(f"classify:{recipe.tag}"):
                    predictions = stage_classify(config, data, table, out)
            with timer.stage(f"evaluate:{recipe.tag}"):
                for direction in config.directions:
                    truths = _query_truths(data.split, direction)
                    baseline_counts: list[int] = []
                    for tag, model in models.items():
                        rankings = lp_unified_rankings(model, tag, data, direction, top_k=config.lp_top_k)
                        scores, counts = _score_method(rankings, truths)
                        report.add(recipe.tag, tag, direction, scores)
                        baseline_counts = baseline_counts or counts
                    for tag, rows in predictions.items():
                        rankings = clf_unified_rankings(rows, tag, data, direction)
                        scores, _ = _score_method(rankings, truths)
                        report.add(recipe.tag, tag, direction, scores)
                    if baseline_counts:
                        report.baselines.setdefault(recipe.tag, {})[direction.value] = (
                            ev.random_hits_baseline(baseline_counts, 10)
                        )
        report_dir = out / "report"
        report.save(report_dir)
        (report_dir / "timings.json").write_text(
            json.dumps(timer.timings, indent=2, sort_keys=True) + "\n"
        )
    return report


def run_case_study(
    config: ExperimentConfig,
    out_dir: str | Path,
    direction: ev.Direction,
    query_name: str | None = None,
    variant_tag: str | None = None,
) -> tuple[ev.CaseStudyTable, Path]:
    """Per-entity comparison table; classification columns first, then models.

    Link-prediction columns keep only each model's strongest candidates
    (`case_study_lp_top_k`), so truths outside that window show as "-".
    """
    out = Path(out_dir)
    recipes = {r.tag: r for r in config.variants}
    recipe = recipes[variant_tag] if variant_tag else config.variants[0]
    stage_split(config, out)
    data = build_variant(config, recipe, out)
    truths = _query_truths(data.split, direction)
    if not truths:
        raise EvalError("test split holds no positive pairs for this direction")
    if query_name is None:
        query = max(truths, key=lambda q: (len(truths[q]), -q))
    else:
        if not data.vocab.has_entity(query_name):
            raise EvalError(f"unknown query entity {query_name!r}")
        query = data.vocab.entity_id(query_name)
        if query not in truths:
            raise EvalError(f"{query_name!r} has no positive test associations")
    methods: list[ev.UnifiedRanking] = []
    table = stage_walk_table(config, data, out)
    for tag, rows in stage_classify(config, data, table, out).items():
        methods.append(ev.unify_clf(rows, query, direction, tag))
    for model_cfg in config.lp_models:
        model = stage_train_lp(config, data, model_cfg, out)
        ranked = lp_unified_rankings(
            model, model_cfg.kind.value, data, direction, top_k=config.case_study_lp_top_k
        )
        methods.append(ranked[query])
    study = ev.case_study(query, methods, truths[query])
    report_dir = out / "report"
    report_dir.mkdir(parents=True, exist_ok=True)
    dest = report_dir / f"case_study_{direction.value}_{data.vocab.entity_name(query).replace('/', '_').replace(':', '_')}.tsv"
    dest.write_text(study.to_tsv(data.vocab), encoding="utf-8")
    return study, dest


def validate(config: ExperimentConfig, out_dir: str | Path | None = None) -> list[str]:
    """Static checks; returns human-readable diagnostics (empty when clean)."""
    problems: list[str] = []
    files = [config.positive_pairs]
    files += [config.base_dir / e["triples"] for e in config.ontologies]
    files += [config.base_dir / e["path"] for e in config.annotations]
    if config.logical_definitions:
        files.append(config.logical_definitions)
    if config.ontology_mappings:
        files.append(config.ontology_mappings)
    for path in files:
        if not Path(path).exists():
            problems.append(f"missing input file: {path}")
    known_tags = {e["tag"] for e in config.ontologies}
    for recipe in config.variants:
        unknown = set(recipe.ontologies) - known_tags
        if unknown:
            problems.append(f"variant {recipe.tag}: unknown ontology tags {sorted(unknown)}")
    if Path(config.positive_pairs).exists():
        vocab = Vocabulary()
        positives = load_positive_pairs(config.positive_pairs, vocab)
        if not positives:
            problems.append("positives file is empty")
        elif config.negatives != "match_positives":
            genes = {p.gene for p in positives}
            diseases = {p.disease for p in positives}
            feasible = len(genes) * len(diseases) - len(positives)
            if int(config.negatives) > feasible:
                problems.append(
                    f"negative count {config.negatives} infeasible; at most {feasible} available"
                )
    if out_dir is not None:
        for recipe in config.variants:
            emb_dir = Path(out_dir) / "embeddings" / recipe.tag
            for model_cfg in config.lp_models:
                sidecar = emb_dir / f"{model_cfg.kind.value}.bin.json"
                if sidecar.exists():
                    cached = json.loads(sidecar.read_text())
                    if cached.get("dim") != model_cfg.dim:
                        problems.append(
                            f"cached {model_cfg.kind.value} embeddings for {recipe.tag} "
                            f"have dim {cached.get('dim')}, config says {model_cfg.dim}"
                        )
    return problems
