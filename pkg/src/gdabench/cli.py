"""Command-line entry point.

Subcommands mirror the pipeline stages; `run` executes all of them.  Every
command takes --config (experiment JSON) and --out (artifact directory).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import evaluate as ev
from . import pipeline
from .errors import GdaBenchError
from .synth import SynthSpec, generate_synthetic_dataset


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="experiment config JSON")
    parser.add_argument("--out", required=True, help="output directory for artifacts")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument(
        "--deterministic",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="force single-worker, bit-reproducible runs (default on)",
    )


def _load(args) -> pipeline.ExperimentConfig:
    return pipeline.load_config(args.config, deterministic=args.deterministic, seed=args.seed)


def _variant(config: pipeline.ExperimentConfig, tag: str | None) -> pipeline.VariantRecipe:
    if tag is None:
        return config.variants[0]
    for recipe in config.variants:
        if recipe.tag == tag:
            return recipe
    raise GdaBenchError(f"unknown variant {tag!r}; config defines: "
                        f"{', '.join(r.tag for r in config.variants)}")


def cmd_split(args) -> int:
    config = _load(args)
    pipeline.stage_split(config, Path(args.out))
    print(f"split written under {Path(args.out) / 'split'}")
    return 0


def cmd_build_kg(args) -> int:
    config = _load(args)
    recipe = _variant(config, args.variant)
    pipeline.stage_split(config, Path(args.out))
    data = pipeline.build_variant(config, recipe, Path(args.out))
    stats = data.kg_lp.stats()
    print(f"{recipe.tag}: {stats.n_triples} triples, {stats.n_classes} classes, "
          f"{stats.n_association} association edges")
    return 0


def cmd_train_lp(args) -> int:
    config = _load(args)
    recipe = _variant(config, args.variant)
    pipeline.stage_split(config, Path(args.out))
    data = pipeline.build_variant(config, recipe, Path(args.out))
    wanted = {m.strip() for m in args.model.split(",")} if args.model else None
    for model_cfg in config.lp_models:
        if wanted and model_cfg.kind.value not in wanted:
            continue
        pipeline.stage_train_lp(config, data, model_cfg, Path(args.out))
        print(f"trained {model_cfg.kind.value} on {recipe.tag}")
    return 0


def cmd_train_walks(args) -> int:
    config = _load(args)
    recipe = _variant(config, args.variant)
    pipeline.stage_split(config, Path(args.out))
    data = pipeline.build_variant(config, recipe, Path(args.out))
    table = pipeline.stage_walk_table(config, data, Path(args.out))
    print(f"walk embeddings for {len(table)} entities on {recipe.tag}")
    return 0


def cmd_classify(args) -> int:
    config = _load(args)
    recipe = _variant(config, args.variant)
    pipeline.stage_split(config, Path(args.out))
    data = pipeline.build_variant(config, recipe, Path(args.out))
    table = pipeline.stage_walk_table(config, data, Path(args.out))
    predictions = pipeline.stage_classify(config, data, table, Path(args.out))
    for tag, rows in predictions.items():
        print(f"{tag}: {len(rows)} test pairs scored")
    return 0


def cmd_run(args) -> int:
    config = _load(args)
    report = pipeline.run(config, args.out)
    print(report.to_json(), end="")
    return 0


def cmd_evaluate(args) -> int:
    # evaluation is cheap and cache-backed: rerun the pipeline end to end
    return cmd_run(args)


def cmd_validate(args) -> int:
    config = _load(args)
    problems = pipeline.validate(config, out_dir=args.out)
    for problem in problems:
        print(problem)
    if not problems:
        print("config ok")
    return 1 if problems else 0


def cmd_case_study(args) -> int:
    config = _load(args)
    study, dest = pipeline.run_case_study(
        config,
        args.out,
        direction=ev.Direction(args.direction),
        query_name=args.query,
        variant_tag=args.variant,
    )
    print(dest)
    sys.stdout.write((dest.read_text()))
    return 0


def cmd_make_synthetic(args) -> int:
    config_path = generate_synthetic_dataset(args.out, SynthSpec(seed=args.seed or 7))
    print(config_path)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="gdabench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, extra in [
        ("split", cmd_split, []),
        ("build-kg", cmd_build_kg, ["variant"]),
        ("train-lp", cmd_train_lp, ["variant", "model"]),
        ("train-walks", cmd_train_walks, ["variant"]),
        ("classify", cmd_classify, ["variant"]),
        ("evaluate", cmd_evaluate, []),
        ("run", cmd_run, []),
        ("validate", cmd_validate, []),
        ("case-study", cmd_case_study, ["variant", "query", "direction"]),
    ]:
        p = sub.add_parser(name)
        _add_common(p)
        if "variant" in extra:
            p.add_argument("--variant", default=None, help="graph variant tag (default: first)")
        if "model" in extra:
            p.add_argument("--model", default=None, help="comma-separated model kinds")
        if "query" in extra:
            p.add_argument("--query", default=None, help="query entity (default: most test truths)")
        if "direction" in extra:
            p.add_argument(
                "--direction",
                default=ev.Direction.GENE_TO_DISEASE.value,
                choices=[d.value for d in ev.Direction],
            )
        p.set_defaults(fn=fn)

    p = sub.add_parser("make-synthetic", help="generate the bundled synthetic benchmark dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=cmd_make_synthetic)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except GdaBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
