"""Command-line interface.

Subcommands: synth, extract, cv, train, score, importance. Every command
is deterministic given its inputs, config and seed; machine outputs are
JSON or CSV and byte-stable across runs. Exit codes: 0 success, 1 input
or validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, config as cfgmod, ocsvm, persistence, pipeline, synth
from .analysis import feature_importance
from .errors import NumericalError, ValidationError
from .modelsel import GridConfig, grid_search
from .fusion import Scaler

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on usage errors; keep 2 reserved for
    # numerical failures by funnelling usage problems through the
    # validation path instead.
    def error(self, message):
        raise ValidationError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="artauth", description=__doc__)
    parser.add_argument("--version", action="version", version=f"artauth {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic paired-image corpus")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="flat key=value config file (synth_* keys)")
    p.add_argument("--seed", type=int, help="override the corpus seed")

    p = sub.add_parser("extract", help="extract fused feature vectors for a manifest")
    p.add_argument("--manifest", required=True, help="CSV: id,visual_path,xray_path[,label]")
    p.add_argument("--out", required=True, help="feature table (.csv or .json)")
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--strict-paper", action="store_true",
                   help="linear (non-circular) hue variance")
    p.add_argument("--allow-partial", action="store_true",
                   help="write successful rows even when some rows fail")
    p.add_argument("--dump-preprocessed", metavar="DIR",
                   help="debug: write preprocessed grayscale rasters as PNG")

    p = sub.add_parser("cv", help="grouped cross-validation grid search; refits the winner")
    p.add_argument("--features", required=True, help="feature table from 'extract'")
    p.add_argument("--out", required=True, help="cross-validation report JSON")
    p.add_argument("--model-out", help="winning model file (default: <out>.model.json)")
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--seed", type=int, help="override the fold/negative seed")
    p.add_argument("--modality", choices=["fused", "visual", "xray"], default="fused")

    p = sub.add_parser("train", help="train one model at fixed hyperparameters")
    p.add_argument("--features", required=True)
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--out", required=True, help="model file")
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--seed", type=int, help="recorded in provenance")
    p.add_argument("--modality", choices=["fused", "visual", "xray"], default="fused")

    p = sub.add_parser("score", help="score one painting pair against a model")
    p.add_argument("--model", required=True)
    p.add_argument("--visual", required=True)
    p.add_argument("--xray", required=True)
    p.add_argument("--out", help="also write the JSON result to a file")

    p = sub.add_parser("importance", help="PCA feature-importance attribution")
    p.add_argument("--features", help="feature table from 'extract'")
    p.add_argument("--model", help="model file; uses its stored support vectors")
    p.add_argument("--out", help="also write the JSON report to a file")

    return parser


def _cmd_synth(args) -> int:
    cfg = cfgmod.load_config(args.config)
    spec = cfgmod.corpus_spec(cfg, seed=args.seed)
    samples = synth.generate_corpus(spec)
    manifest = synth.write_corpus(samples, args.out, spec)
    print(f"wrote {len(samples)} painting pairs under {args.out} ({manifest})")
    return EXIT_OK


def _select_modality(table, modality: str):
    if modality == "fused":
        return table
    return table.select_columns(f"{modality}_")


def _cmd_extract(args) -> int:
    cfg = cfgmod.load_config(args.config)
    if args.strict_paper:
        cfg["strict_paper"] = True
    extraction = cfgmod.extraction_settings(cfg)
    rows = persistence.read_manifest(args.manifest)
    if args.dump_preprocessed:
        _dump_preprocessed(rows, extraction, Path(args.dump_preprocessed))
    table, failures = pipeline.extract_table(rows, extraction)
    for pid, msg in failures:
        print(f"error: painting {pid}: {msg}", file=sys.stderr)
    if failures and not args.allow_partial:
        print(
            f"extraction failed for {len(failures)} of {len(rows)} rows; "
            "no output written (use --allow-partial to keep the rest)",
            file=sys.stderr,
        )
        return EXIT_VALIDATION
    if table is None:
        print("error: no rows could be extracted", file=sys.stderr)
        return EXIT_VALIDATION
    persistence.write_features(table, args.out)
    print(f"wrote {len(table.ids)} feature rows to {args.out}")
    return EXIT_VALIDATION if failures else EXIT_OK


def _dump_preprocessed(rows, extraction, out_dir: Path) -> None:
    from .features import Modality
    from .imaging import (apply_clahe, load_image, resize_bicubic,
                          stretch_range, to_grayscale)

    cfg = pipeline._preprocess_from_extraction(extraction)
    out_dir.mkdir(parents=True, exist_ok=True)
    for row in rows:
        vis = to_grayscale(resize_bicubic(load_image(row.visual_path), cfg.target_size))
        from .imaging import save_png

        save_png(apply_clahe(vis, cfg), out_dir / f"{row.painting_id}_visual_pre.png")
        xray = resize_bicubic(to_grayscale(load_image(row.xray_path)), cfg.target_size)
        save_png(
            apply_clahe(stretch_range(xray), cfg),
            out_dir / f"{row.painting_id}_xray_pre.png",
        )


def _cmd_cv(args) -> int:
    cfg = cfgmod.load_config(args.config)
    table = persistence.read_features(args.features)
    table = _select_modality(table, args.modality)
    grid = cfgmod.grid_config(cfg, seed=args.seed)
    report, model = grid_search(table, grid)
    out = Path(args.out)
    model_out = Path(args.model_out) if args.model_out else out.with_suffix(".model.json")
    provenance = {
        "seed": grid.seed,
        "config_hash": cfgmod.config_hash(cfg),
        "modality": args.modality,
        "n_paintings": len(table.ids),
    }
    persistence.save_report(report, out, extra={"provenance": provenance})
    persistence.save_model(
        model, model_out,
        extraction=cfgmod.extraction_settings(cfg),
        provenance=provenance,
    )
    print(
        f"grid search over {len(grid.nus) * len(grid.gammas)} cells x "
        f"{grid.folds} folds: best nu={report.best_nu} gamma={report.best_gamma} "
        f"F1={report.best_f1:.4f}"
    )
    print(f"report: {out}\nmodel: {model_out}")
    return EXIT_OK


def _cmd_train(args) -> int:
    cfg = cfgmod.load_config(args.config)
    table = persistence.read_features(args.features)
    table = _select_modality(table, args.modality)
    scaler = Scaler.fit(table.matrix)
    model = ocsvm.train(
        scaler.transform_matrix(table.matrix),
        args.nu,
        ocsvm.KernelParams(gamma=args.gamma),
        scaler=scaler,
        schema=table.schema,
    )
    persistence.save_model(
        model,
        args.out,
        extraction=cfgmod.extraction_settings(cfg),
        provenance={
            "seed": args.seed if args.seed is not None else cfg["seed"],
            "config_hash": cfgmod.config_hash(cfg),
            "modality": args.modality,
            "n_paintings": len(table.ids),
        },
    )
    print(f"trained on {len(table.ids)} paintings; model: {args.out}")
    return EXIT_OK


def _cmd_score(args) -> int:
    model, payload = persistence.load_model(args.model)
    extraction = payload.get("extraction") or cfgmod.extraction_settings(
        dict(cfgmod.DEFAULTS)
    )
    score, label = pipeline.score_pair(model, args.visual, args.xray, extraction)
    result = dict(score.to_dict(), classification=label.value)
    text = persistence.canonical_json(result)
    print(text)
    if args.out:
        persistence.atomic_write_text(args.out, text + "\n")
    return EXIT_OK


def _cmd_importance(args) -> int:
    if bool(args.features) == bool(args.model):
        raise ValidationError("pass exactly one of --features or --model")
    if args.features:
        table = persistence.read_features(args.features)
        scaled = Scaler.fit(table.matrix).transform_matrix(table.matrix)
        report = feature_importance(scaled, table.schema)
    else:
        model, _ = persistence.load_model(args.model)
        report = feature_importance(
            model.support_vectors, model.schema or None
        )
    text = persistence.canonical_json(report.to_dict())
    print(text)
    if args.out:
        persistence.atomic_write_text(args.out, text + "\n")
    print("\nrank  contribution  feature", file=sys.stderr)
    for rank, (name, value) in enumerate(report.ranked(), start=1):
        print(f"{rank:4d}  {value:12.6f}  {name}", file=sys.stderr)
    return EXIT_OK


_COMMANDS = {
    "synth": _cmd_synth,
    "extract": _cmd_extract,
    "cv": _cmd_cv,
    "train": _cmd_train,
    "score": _cmd_score,
    "importance": _cmd_importance,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
