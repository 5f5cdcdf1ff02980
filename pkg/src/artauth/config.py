"""Flat key-value run configuration.

The config file is plain text, one ``key = value`` per line, ``#`` for
comments. Every key has a default; unknown keys are rejected so typos
cannot silently change a run. The same file feeds preprocessing, the
hyperparameter grid and the corpus generator, and its hash is recorded
in model provenance.
"""

from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Optional

from .errors import ValidationError
from .imaging import PreprocessConfig
from .modelsel import GridConfig
from .synth import CorpusSpec

__all__ = [
    "DEFAULTS",
    "load_config",
    "parse_config_text",
    "config_hash",
    "preprocess_config",
    "grid_config",
    "corpus_spec",
    "extraction_settings",
]

# key -> (parser, default)
_BOOL = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}


def _parse_bool(raw: str) -> bool:
    try:
        return _BOOL[raw.strip().lower()]
    except KeyError:
        raise ValidationError(f"expected a boolean, got {raw!r}") from None


def _parse_int_list(raw: str) -> tuple[int, ...]:
    return tuple(int(v.strip()) for v in raw.split(",") if v.strip())


def _parse_float_list(raw: str) -> tuple[float, ...]:
    return tuple(float(v.strip()) for v in raw.split(",") if v.strip())


_SCHEMA = {
    # preprocessing / extraction
    "target_size": (int, 512),
    "clahe_clip_limit": (float, 2.0),
    "clahe_tile_grid": (int, 8),
    "gray_levels": (int, 32),
    "glcm_distances": (_parse_int_list, (1, 2)),
    "glcm_angles": (_parse_int_list, (0, 45, 90, 135)),
    "strict_paper": (_parse_bool, False),
    # model selection
    "nus": (_parse_float_list, (0.01, 0.05, 0.1, 0.15, 0.2)),
    "gammas": (_parse_float_list, (0.001, 0.01, 0.1, 1.0)),
    "folds": (int, 10),
    "seed": (int, 0),
    "test_fraction": (float, 0.2),
    # synthetic corpus
    "synth_n_authentic": (int, 24),
    "synth_n_forgery": (int, 24),
    "synth_image_size": (int, 512),
    "synth_seed": (int, 7),
    "synth_base_cells": (int, 4),
    "synth_octaves": (int, 6),
    "synth_persistence": (float, 0.5),
    "synth_detail_weight": (float, 0.35),
    "synth_hue_center": (float, 30.0),
    "synth_hue_span": (float, 40.0),
    "synth_saturation": (float, 0.45),
    "synth_forgery_perturbation": (float, 0.3),
}

DEFAULTS = {key: default for key, (_, default) in _SCHEMA.items()}


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse config text onto the defaults; unknown keys are errors."""
    values = dict(DEFAULTS)
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValidationError(f"{source}:{lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in _SCHEMA:
            raise ValidationError(f"{source}:{lineno}: unknown config key {key!r}")
        parser, _ = _SCHEMA[key]
        try:
            values[key] = parser(raw)
        except (ValueError, ValidationError) as exc:
            raise ValidationError(f"{source}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def load_config(path: Optional[str | Path]) -> dict:
    if path is None:
        return dict(DEFAULTS)
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"config file not found: {path}")
    return parse_config_text(path.read_text(), source=str(path))


def config_hash(cfg: dict) -> str:
    canon = "\n".join(f"{k}={cfg[k]!r}" for k in sorted(cfg))
    return hashlib.sha256(canon.encode()).hexdigest()


def preprocess_config(cfg: dict) -> PreprocessConfig:
    return PreprocessConfig(
        target_size=cfg["target_size"],
        clahe_clip_limit=cfg["clahe_clip_limit"],
        clahe_tile_grid=cfg["clahe_tile_grid"],
        gray_levels=cfg["gray_levels"],
    )


def grid_config(cfg: dict, seed: Optional[int] = None) -> GridConfig:
    return GridConfig(
        nus=cfg["nus"],
        gammas=cfg["gammas"],
        folds=cfg["folds"],
        seed=cfg["seed"] if seed is None else seed,
    )


def corpus_spec(cfg: dict, seed: Optional[int] = None) -> CorpusSpec:
    return CorpusSpec(
        n_authentic=cfg["synth_n_authentic"],
        n_forgery=cfg["synth_n_forgery"],
        image_size=cfg["synth_image_size"],
        seed=cfg["synth_seed"] if seed is None else seed,
        base_cells=cfg["synth_base_cells"],
        octaves=cfg["synth_octaves"],
        persistence=cfg["synth_persistence"],
        detail_weight=cfg["synth_detail_weight"],
        hue_center=cfg["synth_hue_center"],
        hue_span=cfg["synth_hue_span"],
        saturation=cfg["synth_saturation"],
        forgery_perturbation=cfg["synth_forgery_perturbation"],
    )


def extraction_settings(cfg: dict) -> dict:
    """The subset of config that determines feature values, for provenance."""
    return {
        "target_size": cfg["target_size"],
        "clahe_clip_limit": cfg["clahe_clip_limit"],
        "clahe_tile_grid": cfg["clahe_tile_grid"],
        "gray_levels": cfg["gray_levels"],
        "glcm_distances": list(cfg["glcm_distances"]),
        "glcm_angles": list(cfg["glcm_angles"]),
        "strict_paper": cfg["strict_paper"],
    }
