"""End-to-end helpers shared by the CLI commands."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .analysis import CalibratedScore, calibrate
from .errors import ValidationError
from .features import Modality, extract_features
from .fusion import FusedVector, fuse
from .imaging import PreprocessConfig, load_image
from .modelsel import FeatureTable
from .ocsvm import Classification, OcSvmModel, decision_value
from .persistence import ManifestRow


def _preprocess_from_extraction(extraction: dict) -> PreprocessConfig:
    return PreprocessConfig(
        target_size=int(extraction["target_size"]),
        clahe_clip_limit=float(extraction["clahe_clip_limit"]),
        clahe_tile_grid=int(extraction["clahe_tile_grid"]),
        gray_levels=int(extraction["gray_levels"]),
    )


def extract_fused(
    visual_path: str | Path,
    xray_path: str | Path,
    painting_id: str,
    extraction: dict,
) -> FusedVector:
    """Load one painting's image pair and produce its fused feature vector."""
    cfg = _preprocess_from_extraction(extraction)
    distances = tuple(extraction["glcm_distances"])
    angles = tuple(extraction["glcm_angles"])
    strict = bool(extraction["strict_paper"])
    visual = extract_features(
        load_image(visual_path),
        Modality.VISUAL,
        cfg,
        distances=distances,
        angles=angles,
        strict_linear_hue=strict,
    )
    xray = extract_features(
        load_image(xray_path),
        Modality.XRAY,
        cfg,
        distances=distances,
        angles=angles,
        strict_linear_hue=strict,
    )
    return fuse(visual, xray, painting_id)


def extract_table(
    rows: Sequence[ManifestRow], extraction: dict
) -> tuple[Optional[FeatureTable], list[tuple[str, str]]]:
    """Extract fused vectors for every manifest row.

    Returns (table, failures); the table covers the successful rows only
    and is None when nothing succeeded.
    """
    ids = []
    vectors = []
    schema = None
    failures = []
    for row in rows:
        try:
            fused = extract_fused(
                row.visual_path, row.xray_path, row.painting_id, extraction
            )
        except ValidationError as exc:
            failures.append((row.painting_id, str(exc)))
            continue
        ids.append(row.painting_id)
        vectors.append(fused.values)
        schema = fused.schema
    if not ids:
        return None, failures
    table = FeatureTable(
        ids=tuple(ids), matrix=np.stack(vectors), schema=schema
    )
    return table, failures


def project_to_model_schema(fused: FusedVector, model: OcSvmModel) -> np.ndarray:
    """Select the fused columns a (possibly single-modality) model expects."""
    if not model.schema:
        raise ValidationError("model carries no feature schema")
    index = {name: k for k, name in enumerate(fused.schema)}
    missing = [name for name in model.schema if name not in index]
    if missing:
        raise ValidationError(
            f"model feature schema does not match the extractor (missing {missing})"
        )
    return fused.values[[index[name] for name in model.schema]]


def score_pair(
    model: OcSvmModel,
    visual_path: str | Path,
    xray_path: str | Path,
    extraction: dict,
) -> tuple[CalibratedScore, Classification]:
    """Extract, project, scale and score one painting pair."""
    if model.scaler is None:
        raise ValidationError("model carries no scaler; cannot score raw features")
    fused = extract_fused(visual_path, xray_path, "query", extraction)
    raw = project_to_model_schema(fused, model)
    scaled = model.scaler.transform_matrix(raw[None, :])[0]
    score = decision_value(model, scaled)
    label = (
        Classification.AUTHENTIC if score >= 0.0 else Classification.ANOMALOUS
    )
    return calibrate(model, score), label
