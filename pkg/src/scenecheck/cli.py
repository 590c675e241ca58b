"""Command-line front end.

One binary, subcommand style; every randomized command requires an
explicit --seed so runs are reproducible.  Reports are JSON documents
(tests and tooling assert on fields); evaluate additionally prints a
human-readable table of the same data.

Exit codes: 0 success, 1 validation error, 2 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from collections import Counter
from pathlib import Path

from . import corpus as corpus_mod
from .context import PLACEHOLDER, score_attributes
from .corpus import (
    EVAL_TAG,
    Corpus,
    SyntheticConfig,
    generate_contradiction,
    load_model,
    save_model,
    synth_corpus,
)
from .errors import SceneCheckError
from .labelgrid import DEFAULT_MIN_AREA, extract_objects, load_label_grid
from .relations import relations_for_objects
from .seeds import derive_seed
from .stats import ALPHA_DEFAULT, StatsBuilder, accumulate, finalize
from .verifier import (
    CONTRADICTIONS_PER_IMAGE,
    Hyperparams,
    VerifierRegistry,
    train_registry,
    verify,
)


def _print_json(payload) -> None:
    print(json.dumps(payload, sort_keys=True, indent=1))


def _context_arg(value: str) -> str | None:
    return None if value == "none" else value


def _build_one_stats(corpus: Corpus, ids: list[str], alpha: float, min_area: int):
    builder = StatsBuilder.for_classes(corpus.class_map)
    for image_id in ids:
        grid = corpus.grid(image_id)
        objects = extract_objects(grid, min_area)
        accumulate(builder, objects, relations_for_objects(grid, objects))
    return finalize(builder, alpha)


def cmd_synth(args) -> int:
    doc = corpus_mod._read_json(Path(args.config))
    config = SyntheticConfig.from_dict(doc)
    config = dataclasses.replace(config, seed=args.seed)
    corpus, _ = synth_corpus(config, args.out)
    _print_json(
        {
            "command": "synth",
            "out": str(args.out),
            "seed": args.seed,
            "images": {
                "train": len(corpus.image_ids("train")),
                "val": len(corpus.image_ids("val")),
            },
        }
    )
    return 0


def cmd_build_stats(args) -> int:
    corpus = Corpus.load(args.corpus)
    train_ids = corpus.image_ids("train")
    out = Path(args.out)
    written = []
    model = _build_one_stats(corpus, train_ids, args.alpha, args.min_area)
    save_model(out, model)
    written.append(str(out))
    context = _context_arg(args.context)
    if context is not None:
        table = corpus.attributes()
        from .context import partition_corpus

        groups = partition_corpus(train_ids, table, context)
        for value in sorted(groups):
            if value == PLACEHOLDER:
                continue
            path = out.parent / f"{out.stem}.{value}{out.suffix}"
            save_model(path, _build_one_stats(corpus, sorted(groups[value]), args.alpha, args.min_area))
            written.append(str(path))
    _print_json({"command": "build-stats", "written": written})
    return 0


def cmd_select_contexts(args) -> int:
    corpus = Corpus.load(args.corpus)
    table = corpus.attributes()
    labels: dict[str, Counter] = {}
    for image_id in corpus.image_ids("train"):
        grid = corpus.grid(image_id)
        labels[image_id] = Counter(
            o.class_id for o in extract_objects(grid, args.min_area)
        )
    report = score_attributes(
        table, labels, min_coverage=args.min_coverage, min_balance=args.min_balance
    )
    doc = report.to_dict()
    Path(args.out).write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")
    _print_json(doc)
    return 0


def cmd_gen_contradictions(args) -> int:
    corpus = Corpus.load(args.corpus)
    out = Path(args.out)
    (out / "contradictions").mkdir(parents=True, exist_ok=True)
    pairs = []
    skipped = []
    for idx, image_id in enumerate(corpus.image_ids(args.split)):
        grid = corpus.grid(image_id)
        try:
            modified, removed = generate_contradiction(
                grid, derive_seed(args.seed, EVAL_TAG, idx), min_area=args.min_area
            )
        except SceneCheckError:
            skipped.append(image_id)
            continue
        invalid_path = out / "contradictions" / f"{image_id}.lgrid"
        invalid_path.write_text(modified.to_text())
        pairs.append(
            {
                "image_id": image_id,
                "valid": str(corpus.grid_path(image_id)),
                "invalid": str(invalid_path),
                "removed_class": removed,
            }
        )
    manifest = {
        "schema_version": 1,
        "seed": args.seed,
        "split": args.split,
        "pairs": pairs,
        "skipped": skipped,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=1) + "\n")
    _print_json({"command": "gen-contradictions", "pairs": len(pairs), "skipped": len(skipped)})
    return 0


def cmd_train(args) -> int:
    corpus = Corpus.load(args.corpus)
    context = _context_arg(args.context)
    table = corpus.attributes() if context is not None else None
    registry = train_registry(
        corpus,
        table,
        context,
        Hyperparams(learning_rate=args.lr, epochs=args.epochs, l2_lambda=args.l2),
        seed=args.seed,
        contradictions_per_image=args.contradictions_per_image,
        min_area=args.min_area,
        n_min=args.n_min,
        aggregation_mode=args.aggregation,
        alpha=args.alpha,
    )
    save_model(args.out, registry)
    _print_json(
        {
            "command": "train",
            "out": str(args.out),
            "context_attribute": context,
            "contexts": sorted(registry.models),
            "seed": args.seed,
        }
    )
    return 0


def cmd_verify(args) -> int:
    registry = load_model(args.registry)
    if not isinstance(registry, VerifierRegistry):
        raise SceneCheckError(f"{args.registry} does not hold a verifier registry")
    if args.classes:
        classes_doc = corpus_mod._read_json(Path(args.classes))
        class_map = {int(k): str(v) for k, v in classes_doc["classes"].items()}
    else:
        class_map = {c: str(c) for c in registry.global_stats.classes}
    grid = load_label_grid(args.image, class_map)
    attributes = None
    if args.attributes:
        raw = corpus_mod._read_json(Path(args.attributes))
        annotations = raw["annotations"] if isinstance(raw, dict) else raw
        for entry in annotations:
            if entry.get("image_id") == grid.image_id:
                attributes = entry.get("attributes", {})
                break
    verdict = verify(grid, registry, attributes)
    _print_json(verdict.to_dict())
    return 0


def _accuracy(rows) -> float:
    return sum(1 for r in rows if r["correct"]) / len(rows) if rows else 0.0


def cmd_evaluate(args) -> int:
    started = time.monotonic()
    registry = load_model(args.registry)
    if not isinstance(registry, VerifierRegistry):
        raise SceneCheckError(f"{args.registry} does not hold a verifier registry")
    corpus = Corpus.load(args.corpus)
    table = corpus.attributes()
    context_attribute = registry.context_attribute

    log_rows = []
    for idx, image_id in enumerate(corpus.image_ids("val")):
        grid = corpus.grid(image_id)
        record = table.record(image_id)
        context = record.get(context_attribute, PLACEHOLDER) if context_attribute else None
        variants = [(grid, False)]
        if len(extract_objects(grid, registry.min_area)) >= 2:
            twin, _ = generate_contradiction(
                grid, derive_seed(args.seed, EVAL_TAG, idx), min_area=registry.min_area
            )
            variants.append((twin, True))
        for variant_grid, expected in variants:
            dispatched = verify(variant_grid, registry, record)
            forced_global = verify(variant_grid, registry, None)
            log_rows.append(
                {
                    "image_id": image_id,
                    "variant": "contradiction" if expected else "valid",
                    "context": context,
                    "expected": expected,
                    "model_used": dispatched.model_used,
                    "dispatched_contradiction": dispatched.contradiction,
                    "dispatched_confidence": dispatched.confidence,
                    "global_contradiction": forced_global.contradiction,
                    "global_confidence": forced_global.confidence,
                    "correct": dispatched.contradiction == expected,
                    "global_correct": forced_global.contradiction == expected,
                }
            )

    n_valid = sum(1 for r in log_rows if not r["expected"])
    n_invalid = len(log_rows) - n_valid
    global_accuracy = (
        sum(1 for r in log_rows if r["global_correct"]) / len(log_rows) if log_rows else 0.0
    )
    contexts = {}
    if context_attribute:
        for value in sorted({r["context"] for r in log_rows}):
            rows = [r for r in log_rows if r["context"] == value]
            contexts[value] = {
                "accuracy": _accuracy(rows),
                "valid": sum(1 for r in rows if not r["expected"]),
                "invalid": sum(1 for r in rows if r["expected"]),
                "total": len(rows),
            }
    per_context_avg = (
        sum(c["accuracy"] for c in contexts.values()) / len(contexts) if contexts else None
    )
    improvement = (
        (per_context_avg - global_accuracy) * 100.0 if per_context_avg is not None else None
    )

    report = {
        "schema_version": 1,
        "command": "evaluate",
        "config": {
            "registry": str(args.registry),
            "corpus": str(args.corpus),
            "context_attribute": context_attribute,
            "aggregation_mode": registry.aggregation_mode,
        },
        "seed": args.seed,
        "wall_time_s": round(time.monotonic() - started, 3),
        "global": {
            "accuracy": global_accuracy,
            "valid": n_valid,
            "invalid": n_invalid,
            "total": len(log_rows),
        },
        "contexts": contexts,
        "per_context_average_accuracy": per_context_avg,
        "improvement_pp": improvement,
    }
    out = Path(args.out)
    out.write_text(json.dumps(report, sort_keys=True, indent=1) + "\n")
    log_path = out.parent / (out.stem + ".verdicts.jsonl")
    with log_path.open("w") as fh:
        for row in log_rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")

    print(f"{'context':<12}{'valid':>8}{'invalid':>9}{'total':>8}{'accuracy':>10}")
    for value, c in contexts.items():
        print(f"{value:<12}{c['valid']:>8}{c['invalid']:>9}{c['total']:>8}{c['accuracy']:>9.2%}")
    print(f"{'global':<12}{n_valid:>8}{n_invalid:>9}{len(log_rows):>8}{global_accuracy:>9.2%}")
    if improvement is not None:
        print(f"per-context average {per_context_avg:.2%}, improvement {improvement:+.2f} pp")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scenecheck",
        description="Verify segmentation label maps with relational co-occurrence statistics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="Generate a synthetic corpus from a config file")
    p.add_argument("config", help="SyntheticConfig JSON document")
    p.add_argument("out", help="Corpus output directory")
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("build-stats", help="Build co-occurrence statistics from the train split")
    p.add_argument("corpus")
    p.add_argument("--context", default="none", help="Context attribute name, or 'none'")
    p.add_argument("--alpha", type=float, default=ALPHA_DEFAULT)
    p.add_argument("--min-area", type=int, default=DEFAULT_MIN_AREA)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_build_stats)

    p = sub.add_parser("select-contexts", help="Rank candidate context attributes")
    p.add_argument("corpus")
    p.add_argument("--min-coverage", type=float, default=0.95)
    p.add_argument("--min-balance", type=float, default=0.10)
    p.add_argument("--min-area", type=int, default=DEFAULT_MIN_AREA)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_select_contexts)

    p = sub.add_parser("gen-contradictions", help="Write paired valid/invalid examples")
    p.add_argument("corpus")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--split", default="val", choices=["train", "val"])
    p.add_argument("--min-area", type=int, default=DEFAULT_MIN_AREA)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_gen_contradictions)

    p = sub.add_parser("train", help="Train the verifier registry")
    p.add_argument("corpus")
    p.add_argument("--context", default="none", help="Context attribute name, or 'none'")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--l2", type=float, default=1e-3)
    p.add_argument("--alpha", type=float, default=ALPHA_DEFAULT)
    p.add_argument("--min-area", type=int, default=DEFAULT_MIN_AREA)
    p.add_argument("--n-min", type=int, default=30)
    p.add_argument(
        "--contradictions-per-image", type=int, default=CONTRADICTIONS_PER_IMAGE
    )
    p.add_argument("--aggregation", default="majority", choices=["majority", "mean_threshold"])
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("verify", help="Verify one label grid and print the verdict")
    p.add_argument("registry")
    p.add_argument("image", help=".lgrid file")
    p.add_argument("--attributes", default=None, help="Annotation JSON for context dispatch")
    p.add_argument("--classes", default=None, help="classes.json for id -> name mapping")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("evaluate", help="Evaluate a registry on the val split")
    p.add_argument("registry")
    p.add_argument("corpus")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SceneCheckError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
