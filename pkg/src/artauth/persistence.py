"""File formats: manifests, feature tables, model files, reports.

Everything written here is byte-stable: floats are serialised with
their shortest round-trip representation, keys are sorted, and files are
written atomically (temp file + rename). No output embeds wall-clock
time.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .errors import ValidationError
from .fusion import Scaler
from .modelsel import CvReport, FeatureTable
from .ocsvm import KernelParams, OcSvmModel

__all__ = [
    "ManifestRow",
    "read_manifest",
    "write_features",
    "read_features",
    "save_model",
    "load_model",
    "save_report",
    "atomic_write_text",
    "canonical_json",
]

MODEL_FORMAT = "artauth-model"
MODEL_VERSION = 1


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass(frozen=True)
class ManifestRow:
    painting_id: str
    visual_path: Path
    xray_path: Path
    label: Optional[str] = None


def read_manifest(path: str | Path) -> list[ManifestRow]:
    """Read a manifest CSV with columns id, visual_path, xray_path[, label].

    Relative image paths are resolved against the manifest's directory.
    """
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"manifest not found: {path}")
    base = path.parent
    rows = []
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        fields = reader.fieldnames or []
        required = {"id", "visual_path", "xray_path"}
        if not required.issubset(fields):
            raise ValidationError(
                f"manifest must have columns id, visual_path, xray_path; got {fields}"
            )
        for lineno, rec in enumerate(reader, start=2):
            pid = (rec.get("id") or "").strip()
            vis = (rec.get("visual_path") or "").strip()
            xray = (rec.get("xray_path") or "").strip()
            if not pid or not vis or not xray:
                raise ValidationError(
                    f"{path}:{lineno}: every row needs id, visual_path and xray_path"
                )
            label = (rec.get("label") or "").strip() or None
            rows.append(
                ManifestRow(
                    painting_id=pid,
                    visual_path=base / vis,
                    xray_path=base / xray,
                    label=label,
                )
            )
    if not rows:
        raise ValidationError(f"{path}: manifest has no rows")
    ids = [r.painting_id for r in rows]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise ValidationError(f"{path}: duplicate painting ids {dupes}")
    return rows


def write_features(table: FeatureTable, path: str | Path) -> None:
    """Write a feature table as CSV (.csv) or JSON records (.json)."""
    path = Path(path)
    if path.suffix == ".json":
        payload = {
            "schema": list(table.schema),
            "rows": [
                {"id": pid, "values": [float(v) for v in table.matrix[k]]}
                for k, pid in enumerate(table.ids)
            ],
        }
        atomic_write_text(path, canonical_json(payload) + "\n")
        return
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("id",) + table.schema)
    for k, pid in enumerate(table.ids):
        writer.writerow([pid] + [repr(float(v)) for v in table.matrix[k]])
    atomic_write_text(path, buf.getvalue())


def read_features(path: str | Path) -> FeatureTable:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"feature table not found: {path}")
    if path.suffix == ".json":
        try:
            payload = json.loads(path.read_text())
            schema = tuple(payload["schema"])
            ids = tuple(str(r["id"]) for r in payload["rows"])
            matrix = np.array([r["values"] for r in payload["rows"]], dtype=np.float64)
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise ValidationError(f"{path}: malformed feature JSON ({exc})") from exc
        return FeatureTable(ids=ids, matrix=matrix, schema=schema)
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty feature table") from None
        if not header or header[0] != "id":
            raise ValidationError(f"{path}: first column must be 'id'")
        schema = tuple(header[1:])
        ids = []
        values = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValidationError(f"{path}:{lineno}: wrong column count")
            ids.append(row[0])
            try:
                values.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: non-numeric value") from exc
    if not ids:
        raise ValidationError(f"{path}: feature table has no rows")
    return FeatureTable(
        ids=tuple(ids), matrix=np.array(values, dtype=np.float64), schema=schema
    )


def _scaler_to_dict(scaler: Optional[Scaler]) -> Optional[dict]:
    if scaler is None:
        return None
    return {
        "means": scaler.means.tolist(),
        "stds": scaler.stds.tolist(),
        "degenerate": [bool(d) for d in scaler.degenerate],
        "epsilon": scaler.epsilon,
    }


def _scaler_from_dict(data: Optional[dict]) -> Optional[Scaler]:
    if data is None:
        return None
    return Scaler(
        means=np.array(data["means"], dtype=np.float64),
        stds=np.array(data["stds"], dtype=np.float64),
        degenerate=np.array(data["degenerate"], dtype=bool),
        epsilon=float(data["epsilon"]),
    )


def save_model(
    model: OcSvmModel,
    path: str | Path,
    *,
    extraction: Optional[dict] = None,
    provenance: Optional[dict] = None,
) -> None:
    """Persist a trained model as a self-describing versioned JSON file.

    ``extraction`` echoes the preprocessing/extraction settings the
    feature rows were produced with, so scoring can reproduce them;
    ``provenance`` records seed, config hash and tool version.
    """
    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "nu": model.nu,
        "gamma": model.params.gamma,
        "rho": model.rho,
        "support_vectors": [[float(v) for v in row] for row in model.support_vectors],
        "alphas": [float(a) for a in model.alphas],
        "train_score_mean": model.train_score_mean,
        "train_score_std": model.train_score_std,
        "scaler": _scaler_to_dict(model.scaler),
        "schema": list(model.schema),
        "extraction": extraction,
        "provenance": {"tool_version": __version__, **(provenance or {})},
    }
    atomic_write_text(Path(path), canonical_json(payload) + "\n")


def load_model(path: str | Path) -> tuple[OcSvmModel, dict]:
    """Load a model file; returns (model, full payload dict)."""
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"model file not found: {path}")
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: corrupt model file ({exc})") from exc
    if not isinstance(payload, dict) or payload.get("format") != MODEL_FORMAT:
        raise ValidationError(f"{path}: not an artauth model file")
    if payload.get("version") != MODEL_VERSION:
        raise ValidationError(
            f"{path}: unsupported model format version {payload.get('version')!r} "
            f"(expected {MODEL_VERSION})"
        )
    try:
        model = OcSvmModel(
            support_vectors=np.array(payload["support_vectors"], dtype=np.float64),
            alphas=np.array(payload["alphas"], dtype=np.float64),
            rho=float(payload["rho"]),
            params=KernelParams(gamma=float(payload["gamma"])),
            nu=float(payload["nu"]),
            train_score_mean=float(payload["train_score_mean"]),
            train_score_std=float(payload["train_score_std"]),
            scaler=_scaler_from_dict(payload.get("scaler")),
            schema=tuple(payload.get("schema", ())),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: malformed model payload ({exc})") from exc
    return model, payload


def save_report(report: CvReport, path: str | Path, *, extra: Optional[dict] = None) -> None:
    payload = report.to_dict()
    if extra:
        payload.update(extra)
    atomic_write_text(Path(path), canonical_json(payload) + "\n")
