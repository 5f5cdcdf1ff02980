"""Painting-level data splitting, grouped cross-validation and grid search.

All splits operate on painting ids, never on individual images: a
painting's visual and X-ray data always land on the same side of every
boundary. Validation-time F1 needs negatives the training data does not
contain, so each fold gets deterministic pseudo-anomalies synthesised
from its own (scaled) training rows.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .fusion import Scaler
from . import ocsvm
from .ocsvm import Classification, KernelParams, OcSvmModel

__all__ = [
    "Label",
    "FeatureTable",
    "GridConfig",
    "Metrics",
    "CvReport",
    "split_train_test",
    "grouped_kfold",
    "synthesize_negatives",
    "compute_metrics",
    "grid_search",
]

DEFAULT_NUS = (0.01, 0.05, 0.1, 0.15, 0.2)
DEFAULT_GAMMAS = (0.001, 0.01, 0.1, 1.0)
DEFAULT_FOLDS = 10

# Sub-stream tag so negative synthesis never shares draws with fold shuffling.
_NEGATIVE_STREAM = 101


class Label(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class FeatureTable:
    """One fused feature row per painting."""

    ids: tuple[str, ...]
    matrix: np.ndarray
    schema: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.ids)) != len(self.ids):
            raise ValidationError("painting ids must be unique")
        if self.matrix.shape != (len(self.ids), len(self.schema)):
            raise ValidationError(
                f"feature matrix shape {self.matrix.shape} does not match "
                f"{len(self.ids)} ids x {len(self.schema)} columns"
            )
        if not np.all(np.isfinite(self.matrix)):
            raise ValidationError("feature matrix contains non-finite values")

    def select_columns(self, prefix: str) -> "FeatureTable":
        """Restrict to columns whose name starts with ``prefix`` (modality filter)."""
        keep = [k for k, name in enumerate(self.schema) if name.startswith(prefix)]
        if not keep:
            raise ValidationError(f"no feature columns start with {prefix!r}")
        return FeatureTable(
            ids=self.ids,
            matrix=self.matrix[:, keep].copy(),
            schema=tuple(self.schema[k] for k in keep),
        )

    def rows(self, ids: Sequence[str]) -> np.ndarray:
        index = {pid: k for k, pid in enumerate(self.ids)}
        try:
            order = [index[pid] for pid in ids]
        except KeyError as exc:
            raise ValidationError(f"unknown painting id {exc.args[0]!r}") from exc
        return self.matrix[order]


@dataclass(frozen=True)
class GridConfig:
    """Hyperparameter grid; grids are kept sorted ascending so the
    documented tie-break (smaller nu, then smaller gamma) is an ordering
    property of the sweep itself."""

    nus: tuple[float, ...] = DEFAULT_NUS
    gammas: tuple[float, ...] = DEFAULT_GAMMAS
    folds: int = DEFAULT_FOLDS
    seed: int = 0

    def __post_init__(self):
        if not self.nus or not self.gammas:
            raise ValidationError("grids must be non-empty")
        if any(not 0 < nu <= 1 for nu in self.nus):
            raise ValidationError("all nu values must lie in (0, 1]")
        if any(g <= 0 for g in self.gammas):
            raise ValidationError("all gamma values must be positive")
        if self.folds < 2:
            raise ValidationError("need at least 2 folds")
        object.__setattr__(self, "nus", tuple(sorted(self.nus)))
        object.__setattr__(self, "gammas", tuple(sorted(self.gammas)))


def split_train_test(
    ids: Sequence[str], test_fraction: float, seed: int
) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Seeded painting-level split; the test side rounds up.

    With 24 paintings and fraction 0.2 this yields 19 train / 5 test.
    Both sides are guaranteed non-empty.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValidationError("test_fraction must lie strictly between 0 and 1")
    n = len(ids)
    if n < 2:
        raise ValidationError("need at least 2 paintings to split")
    n_test = min(max(math.ceil(n * test_fraction), 1), n - 1)
    order = np.random.default_rng(seed).permutation(n)
    test = tuple(ids[k] for k in order[:n_test])
    train = tuple(ids[k] for k in order[n_test:])
    return train, test


def grouped_kfold(
    ids: Sequence[str], k: int, seed: int
) -> list[tuple[tuple[str, ...], tuple[str, ...]]]:
    """Seeded shuffle then contiguous chunking into k validation folds.

    Every painting lands in exactly one validation fold; fold sizes
    differ by at most one.
    """
    n = len(ids)
    if k > n:
        raise ValidationError(f"cannot make {k} folds from {n} paintings")
    if k < 1:
        raise ValidationError("fold count must be positive")
    order = np.random.default_rng(seed).permutation(n)
    shuffled = [ids[i] for i in order]
    base, rem = divmod(n, k)
    folds = []
    start = 0
    for fi in range(k):
        size = base + (1 if fi < rem else 0)
        val = tuple(shuffled[start : start + size])
        train = tuple(shuffled[:start]) + tuple(shuffled[start + size :])
        folds.append((train, val))
        start += size
    return folds


def synthesize_negatives(
    train: np.ndarray, count: int, seed: int | Sequence[int]
) -> np.ndarray:
    """Deterministic pseudo-anomalies from scaled training rows.

    Half the rows (rounding up) shuffle each feature column independently,
    destroying cross-feature structure while keeping every marginal value;
    the other half sample uniformly from [min - 1, max + 1] per dimension.
    """
    train = np.asarray(train, dtype=np.float64)
    if train.ndim != 2 or train.shape[0] == 0:
        raise ValidationError("need non-empty training rows to synthesise negatives")
    if count <= 0:
        raise ValidationError("negative count must be positive")
    rng = np.random.default_rng(seed)
    m, d = train.shape
    n_shuffle = count - count // 2
    n_uniform = count // 2
    blocks = []
    need = n_shuffle
    while need > 0:
        block = np.empty_like(train)
        for col in range(d):
            block[:, col] = train[rng.permutation(m), col]
        blocks.append(block[: min(need, m)])
        need -= min(need, m)
    shuffled = np.vstack(blocks) if blocks else np.empty((0, d))
    if n_uniform:
        lo = train.min(axis=0) - 1.0
        hi = train.max(axis=0) + 1.0
        uniform = rng.uniform(lo, hi, size=(n_uniform, d))
        return np.vstack([shuffled, uniform])
    return shuffled


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    fpr: float
    tp: int
    fp: int
    fn: int
    tn: int
    degenerate: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "fpr": self.fpr,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "tn": self.tn,
            "degenerate": list(self.degenerate),
        }


def compute_metrics(
    predictions: Sequence[Classification], labels: Sequence[Label]
) -> Metrics:
    """Confusion-matrix metrics; zero-denominator ratios become 0, flagged."""
    if len(predictions) != len(labels):
        raise ValidationError("predictions and labels differ in length")
    if not predictions:
        raise ValidationError("cannot compute metrics on empty inputs")
    tp = fp = fn = tn = 0
    for pred, label in zip(predictions, labels):
        if pred is Classification.AUTHENTIC:
            if label is Label.POSITIVE:
                tp += 1
            else:
                fp += 1
        else:
            if label is Label.POSITIVE:
                fn += 1
            else:
                tn += 1
    degenerate = []

    def ratio(num: int, den: int, name: str) -> float:
        if den == 0:
            degenerate.append(name)
            return 0.0
        return num / den

    accuracy = (tp + tn) / len(predictions)
    precision = ratio(tp, tp + fp, "precision")
    recall = ratio(tp, tp + fn, "recall")
    f1 = ratio(2 * tp, 2 * tp + fp + fn, "f1")
    fpr = ratio(fp, fp + tn, "fpr")
    return Metrics(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        fpr=fpr,
        tp=tp,
        fp=fp,
        fn=fn,
        tn=tn,
        degenerate=tuple(degenerate),
    )


_METRIC_NAMES = ("accuracy", "precision", "recall", "f1", "fpr")


@dataclass(frozen=True)
class FoldRecord:
    index: int
    train_ids: tuple[str, ...]
    val_ids: tuple[str, ...]
    scaler_means: np.ndarray
    scaler_stds: np.ndarray

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "train_ids": list(self.train_ids),
            "val_ids": list(self.val_ids),
            "scaler_means": self.scaler_means.tolist(),
            "scaler_stds": self.scaler_stds.tolist(),
        }


@dataclass(frozen=True)
class CellResult:
    nu: float
    gamma: float
    fold_metrics: tuple[Metrics, ...]
    mean: dict
    std: dict

    def to_dict(self) -> dict:
        return {
            "nu": self.nu,
            "gamma": self.gamma,
            "fold_metrics": [m.to_dict() for m in self.fold_metrics],
            "mean": dict(self.mean),
            "std": dict(self.std),
        }


@dataclass(frozen=True)
class CvReport:
    """Everything needed to audit one grid search run."""

    seed: int
    folds: tuple[FoldRecord, ...]
    cells: tuple[CellResult, ...]
    best_nu: float
    best_gamma: float
    best_f1: float
    negatives: dict
    schema: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "folds": [f.to_dict() for f in self.folds],
            "cells": [c.to_dict() for c in self.cells],
            "best": {"nu": self.best_nu, "gamma": self.best_gamma, "f1": self.best_f1},
            "negatives": dict(self.negatives),
            "schema": list(self.schema),
        }


@dataclass(frozen=True)
class _FoldData:
    record: FoldRecord
    train_scaled: np.ndarray
    val_scaled: np.ndarray
    negatives: np.ndarray


def _prepare_folds(table: FeatureTable, cfg: GridConfig) -> list[_FoldData]:
    prepared = []
    for fi, (train_ids, val_ids) in enumerate(
        grouped_kfold(table.ids, cfg.folds, cfg.seed)
    ):
        try:
            scaler = Scaler.fit(table.rows(train_ids))
            train_scaled = scaler.transform_matrix(table.rows(train_ids))
            val_scaled = scaler.transform_matrix(table.rows(val_ids))
            negatives = synthesize_negatives(
                train_scaled, len(val_ids), seed=[cfg.seed, _NEGATIVE_STREAM, fi]
            )
        except ValidationError as exc:
            raise ValidationError(f"fold {fi}: {exc}") from exc
        record = FoldRecord(
            index=fi,
            train_ids=train_ids,
            val_ids=val_ids,
            scaler_means=scaler.means.copy(),
            scaler_stds=scaler.stds.copy(),
        )
        prepared.append(_FoldData(record, train_scaled, val_scaled, negatives))
    return prepared


def _aggregate(fold_metrics: Sequence[Metrics]) -> tuple[dict, dict]:
    mean = {}
    std = {}
    for name in _METRIC_NAMES:
        vals = np.array([getattr(m, name) for m in fold_metrics])
        mean[name] = float(vals.mean())
        std[name] = float(vals.std())
    return mean, std


def grid_search(
    table: FeatureTable, cfg: GridConfig
) -> tuple[CvReport, OcSvmModel]:
    """Grouped k-fold sweep over the nu x gamma grid, maximising mean F1.

    Each fold fits its scaler on fold-train rows only, trains on them and
    scores the fold's validation positives against an equal number of
    synthetic negatives. The winning cell (ties to smaller nu, then
    smaller gamma) is refit on the whole table and returned with the
    report.
    """
    folds = _prepare_folds(table, cfg)
    cells = []
    best = None  # (f1, nu, gamma)
    for nu in cfg.nus:
        for gamma in cfg.gammas:
            params = KernelParams(gamma=gamma)
            fold_metrics = []
            for fd in folds:
                try:
                    model = ocsvm.train(fd.train_scaled, nu, params)
                except Exception as exc:
                    raise type(exc)(
                        f"grid cell nu={nu} gamma={gamma} fold {fd.record.index}: {exc}"
                    ) from exc
                eval_rows = np.vstack([fd.val_scaled, fd.negatives])
                scores = ocsvm.decision_values(model, eval_rows)
                preds = [
                    Classification.AUTHENTIC if s >= 0 else Classification.ANOMALOUS
                    for s in scores
                ]
                labels = [Label.POSITIVE] * fd.val_scaled.shape[0] + [
                    Label.NEGATIVE
                ] * fd.negatives.shape[0]
                fold_metrics.append(compute_metrics(preds, labels))
            mean, std = _aggregate(fold_metrics)
            cells.append(
                CellResult(
                    nu=nu,
                    gamma=gamma,
                    fold_metrics=tuple(fold_metrics),
                    mean=mean,
                    std=std,
                )
            )
            if best is None or mean["f1"] > best[0]:
                best = (mean["f1"], nu, gamma)

    best_f1, best_nu, best_gamma = best
    scaler = Scaler.fit(table.matrix)
    final_model = ocsvm.train(
        scaler.transform_matrix(table.matrix),
        best_nu,
        KernelParams(gamma=best_gamma),
        scaler=scaler,
        schema=table.schema,
    )
    report = CvReport(
        seed=cfg.seed,
        folds=tuple(fd.record for fd in folds),
        cells=tuple(cells),
        best_nu=best_nu,
        best_gamma=best_gamma,
        best_f1=best_f1,
        negatives={
            "method": "per-dimension permutation of fold-train rows plus "
            "uniform draws over [min-1, max+1] per scaled dimension",
            "per_validation_positive": 1,
            "seed_stream": [cfg.seed, _NEGATIVE_STREAM, "fold_index"],
        },
        schema=table.schema,
    )
    return report, final_model
