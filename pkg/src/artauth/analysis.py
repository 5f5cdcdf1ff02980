"""Feature-importance attribution and decision-score calibration.

Importance comes from a principal component analysis of the scaled
feature matrix: each feature's contribution is its squared loading on
every component, weighted by that component's explained-variance ratio.
The eigensolver is a dependency-free cyclic Jacobi iteration, which is
deterministic and plenty accurate at 28 dimensions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .ocsvm import OcSvmModel

__all__ = [
    "ImportanceReport",
    "CalibratedScore",
    "jacobi_eigh",
    "feature_importance",
    "normal_cdf",
    "calibrate",
]

JACOBI_TOL = 1e-10
JACOBI_MAX_SWEEPS = 100


def jacobi_eigh(matrix: np.ndarray, tol: float = JACOBI_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues, eigenvectors) sorted by descending eigenvalue,
    eigenvectors in columns. Sweeps stop once every off-diagonal entry is
    below tol relative to the matrix scale.
    """
    a = np.array(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError("jacobi_eigh needs a square matrix")
    if not np.allclose(a, a.T, atol=1e-12, rtol=1e-12):
        raise ValidationError("jacobi_eigh needs a symmetric matrix")
    n = a.shape[0]
    v = np.eye(n)
    scale = max(float(np.abs(a).max()), 1e-300)
    for _ in range(JACOBI_MAX_SWEEPS):
        off = np.abs(a - np.diag(np.diag(a))).max()
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= tol * scale * 1e-3:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (
                    abs(theta) + math.sqrt(theta * theta + 1.0)
                )
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot_p = c * a[:, p] - s * a[:, q]
                rot_q = s * a[:, p] + c * a[:, q]
                a[:, p], a[:, q] = rot_p, rot_q
                rot_p = c * a[p, :] - s * a[q, :]
                rot_q = s * a[p, :] + c * a[q, :]
                a[p, :], a[q, :] = rot_p, rot_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                rot_p = c * v[:, p] - s * v[:, q]
                rot_q = s * v[:, p] + c * v[:, q]
                v[:, p], v[:, q] = rot_p, rot_q
    eigvals = np.diag(a).copy()
    order = np.argsort(-eigvals, kind="stable")
    return eigvals[order], v[:, order]


@dataclass(frozen=True)
class ImportanceReport:
    """Per-feature variance contributions plus the underlying decomposition."""

    schema: tuple[str, ...]
    contributions: np.ndarray
    loadings: np.ndarray
    explained_variance_ratios: np.ndarray
    eigenvalues: np.ndarray

    def ranked(self) -> list[tuple[str, float]]:
        order = np.argsort(-self.contributions, kind="stable")
        return [(self.schema[k], float(self.contributions[k])) for k in order]

    def to_dict(self) -> dict:
        return {
            "schema": list(self.schema),
            "contributions": self.contributions.tolist(),
            "explained_variance_ratios": self.explained_variance_ratios.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "loadings": self.loadings.tolist(),
            "ranked": [[name, val] for name, val in self.ranked()],
        }


def feature_importance(
    matrix: np.ndarray, schema: Sequence[str] | None = None
) -> ImportanceReport:
    """PCA-based variance attribution over standardised feature rows.

    contribution_j = sum_k loading_jk^2 * explained_variance_ratio_k,
    normalised to sum 1. Loadings follow a deterministic sign convention:
    the largest-magnitude entry of each component is made positive.
    """
    x = np.asarray(matrix, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 3:
        raise ValidationError("feature importance needs at least 3 vectors")
    if not np.all(np.isfinite(x)):
        raise ValidationError("feature matrix contains non-finite values")
    n, d = x.shape
    if schema is None:
        schema = tuple(f"f{k}" for k in range(d))
    schema = tuple(schema)
    if len(schema) != d:
        raise ValidationError("schema length does not match feature count")
    centred = x - x.mean(axis=0)
    cov = centred.T @ centred / n
    eigvals, vecs = jacobi_eigh(cov)
    eigvals = np.maximum(eigvals, 0.0)
    total = float(eigvals.sum())
    if total <= 0:
        raise ValidationError("feature matrix has no variance to attribute")
    for k in range(d):
        lead = int(np.argmax(np.abs(vecs[:, k])))
        if vecs[lead, k] < 0:
            vecs[:, k] = -vecs[:, k]
    ratios = eigvals / total
    contributions = (vecs**2) @ ratios
    contributions = contributions / contributions.sum()
    return ImportanceReport(
        schema=schema,
        contributions=contributions,
        loadings=vecs,
        explained_variance_ratios=ratios,
        eigenvalues=eigvals,
    )


def normal_cdf(z: float) -> float:
    """Standard normal CDF via the error function."""
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


@dataclass(frozen=True)
class CalibratedScore:
    """Decision value in raw form, training-score z units, and Gaussian
    confidence. The raw z-score stays the primary quantity; the
    confidence mapping is a documented convention, not a probability
    estimate from labelled negatives."""

    decision_value: float
    z_score: float
    confidence: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "decision_value": self.decision_value,
            "z_score": self.z_score,
            "confidence": self.confidence,
            "degenerate": self.degenerate,
        }


def calibrate(model: OcSvmModel, decision_value: float) -> CalibratedScore:
    """Express a decision value in standard deviations from the training
    score mean and map it through the normal CDF.

    A model with zero training-score spread is degenerate: confidence is
    1.0 at or above the mean, 0.0 below, and the result is flagged.
    """
    mean = model.train_score_mean
    std = model.train_score_std
    if not math.isfinite(mean) or not math.isfinite(std):
        raise ValidationError("model carries no usable calibration statistics")
    if std <= 0.0:
        return CalibratedScore(
            decision_value=decision_value,
            z_score=0.0,
            confidence=1.0 if decision_value >= mean else 0.0,
            degenerate=True,
        )
    z = (decision_value - mean) / std
    return CalibratedScore(
        decision_value=decision_value,
        z_score=z,
        confidence=normal_cdf(z),
        degenerate=False,
    )
