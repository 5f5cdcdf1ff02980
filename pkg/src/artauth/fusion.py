"""Per-painting fusion of visual and X-ray features, plus z-score scaling."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .features import FeatureVector, Modality

__all__ = ["FusedVector", "Scaler", "fuse", "fused_schema", "fit_scaler", "transform"]

SCALER_EPSILON = 1e-12


def fused_schema(
    visual_schema: Sequence[str], xray_schema: Sequence[str]
) -> tuple[str, ...]:
    """Stable fused column names: visual_* block then xray_* block."""
    return tuple(f"visual_{n}" for n in visual_schema) + tuple(
        f"xray_{n}" for n in xray_schema
    )


@dataclass(frozen=True)
class FusedVector:
    """28-entry concatenation [visual || xray] for one painting."""

    painting_id: str
    values: np.ndarray
    schema: tuple[str, ...]

    def __post_init__(self):
        if self.values.shape != (28,) or len(self.schema) != 28:
            raise ValidationError("fused vector must have exactly 28 entries")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError(f"fused vector for {self.painting_id} is non-finite")


def fuse(visual: FeatureVector, xray: FeatureVector, painting_id: str) -> FusedVector:
    """Concatenate the two modality vectors in fixed order."""
    if visual.modality is not Modality.VISUAL:
        raise ValidationError("first argument must carry visual features")
    if xray.modality is not Modality.XRAY:
        raise ValidationError("second argument must carry X-ray features")
    values = np.concatenate([visual.values, xray.values])
    schema = fused_schema(visual.schema, xray.schema)
    return FusedVector(painting_id=painting_id, values=values, schema=schema)


@dataclass(frozen=True)
class Scaler:
    """Per-dimension z-score parameters fitted on training data only.

    Dimensions whose training standard deviation falls below ``epsilon``
    are flagged degenerate; their z-scores are defined as 0 so that
    dimensionality stays fixed and no NaN can propagate.
    """

    means: np.ndarray
    stds: np.ndarray
    degenerate: np.ndarray
    epsilon: float = SCALER_EPSILON

    @property
    def dim(self) -> int:
        return self.means.shape[0]

    @classmethod
    def fit(cls, matrix: np.ndarray, epsilon: float = SCALER_EPSILON) -> "Scaler":
        """Fit population mean/std per column. Needs at least 2 rows."""
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] < 2:
            raise ValidationError("scaler fitting needs at least 2 vectors")
        means = matrix.mean(axis=0)
        stds = matrix.std(axis=0)
        degenerate = stds < epsilon
        stds = np.where(degenerate, 1.0, stds)
        return cls(means=means, stds=stds, degenerate=degenerate, epsilon=epsilon)

    def transform_matrix(self, matrix: np.ndarray) -> np.ndarray:
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.shape[-1] != self.dim:
            raise ValidationError(
                f"expected {self.dim}-dimensional vectors, got {matrix.shape[-1]}"
            )
        z = (matrix - self.means) / self.stds
        if self.degenerate.any():
            z[..., self.degenerate] = 0.0
        return z

    def inverse_matrix(self, matrix: np.ndarray) -> np.ndarray:
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.shape[-1] != self.dim:
            raise ValidationError(
                f"expected {self.dim}-dimensional vectors, got {matrix.shape[-1]}"
            )
        return matrix * self.stds + self.means


def fit_scaler(train: Sequence[FusedVector], epsilon: float = SCALER_EPSILON) -> Scaler:
    if len(train) < 2:
        raise ValidationError("scaler fitting needs at least 2 vectors")
    return Scaler.fit(np.stack([v.values for v in train]), epsilon=epsilon)


def transform(scaler: Scaler, v: FusedVector) -> FusedVector:
    z = scaler.transform_matrix(v.values[None, :])[0]
    return FusedVector(painting_id=v.painting_id, values=z, schema=v.schema)
