"""One-class SVM with an RBF kernel, trained by a deterministic SMO solver.

The dual problem solved here is

    minimise   0.5 * a' K a
    subject to 0 <= a_i <= 1 / (nu * m),   sum(a) = 1,

whose optimum yields the decision function sum_i a_i K(x_i, x) - rho.
The working-set solver always picks the maximal KKT-violating pair with
lowest-index tie-breaking, so training is bit-reproducible.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NumericalError, ValidationError
from .fusion import Scaler

__all__ = [
    "KernelParams",
    "OcSvmModel",
    "Classification",
    "rbf_kernel",
    "rbf_kernel_matrix",
    "train",
    "decision_value",
    "decision_values",
    "classify",
]

# Convergence is certified at a KKT gap of 1e-6; the default stopping
# tolerance is two decades tighter so decision values carry real margin
# against independent QP solutions.
KKT_TOLERANCE = 1e-8
MAX_STEPS = 100_000


class Classification(enum.Enum):
    AUTHENTIC = "authentic"
    ANOMALOUS = "anomalous"


@dataclass(frozen=True)
class KernelParams:
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValidationError(f"gamma must be positive, got {self.gamma}")


def _sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # Broadcasted pairwise squared distances; avoids BLAS reassociation so
    # results are bit-stable across runs.
    return ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)


def rbf_kernel(a: np.ndarray, b: np.ndarray, p: KernelParams) -> float:
    """exp(-gamma * ||a - b||^2), in (0, 1]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValidationError(f"kernel arguments differ in shape: {a.shape} vs {b.shape}")
    return float(np.exp(-p.gamma * ((a - b) ** 2).sum()))


def rbf_kernel_matrix(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape[1] != b.shape[1]:
        raise ValidationError("kernel matrix arguments differ in dimension")
    return np.exp(-gamma * _sq_dists(a, b))


@dataclass(frozen=True)
class OcSvmModel:
    """Trained boundary: support vectors, dual coefficients and offset.

    ``train_score_mean``/``train_score_std`` are the calibration
    statistics of the training decision values, recorded at fit time.
    The scaler and schema are attached by the pipeline so a stored model
    is self-contained for scoring.
    """

    support_vectors: np.ndarray
    alphas: np.ndarray
    rho: float
    params: KernelParams
    nu: float
    train_score_mean: float
    train_score_std: float
    scaler: Optional[Scaler] = None
    schema: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.support_vectors.shape[0] != self.alphas.shape[0]:
            raise ValidationError("support vector / coefficient count mismatch")
        if not np.all(self.alphas > 0):
            raise ValidationError("stored support vectors must have positive alpha")
        if self.train_score_std < 0:
            raise ValidationError("train_score_std must be non-negative")

    @property
    def dim(self) -> int:
        return self.support_vectors.shape[1]


def _solve_dual(
    kernel: np.ndarray, box: float, tol: float, max_steps: int
) -> tuple[np.ndarray, np.ndarray]:
    """SMO over maximal-violating pairs. Returns (alpha, gradient)."""
    m = kernel.shape[0]
    alpha = np.full(m, 1.0 / m)
    grad = kernel @ alpha
    for _ in range(max_steps):
        can_up = alpha < box
        can_down = alpha > 0.0
        g_up = np.where(can_up, grad, np.inf)
        g_down = np.where(can_down, grad, -np.inf)
        i = int(np.argmin(g_up))
        j = int(np.argmax(g_down))
        violation = g_down[j] - g_up[i]
        if violation <= tol:
            return alpha, grad
        room_i = box - alpha[i]
        room_j = alpha[j]
        curvature = kernel[i, i] + kernel[j, j] - 2.0 * kernel[i, j]
        if curvature > 1e-12:
            step = min(violation / curvature, room_i, room_j)
        else:
            step = min(room_i, room_j)
        new_i = alpha[i] + step
        new_j = alpha[j] - step
        alpha[i] = box if step >= room_i else new_i
        alpha[j] = 0.0 if step >= room_j else new_j
        grad += step * (kernel[:, i] - kernel[:, j])
    can_up = alpha < box
    can_down = alpha > 0.0
    residual = float(
        np.where(can_down, grad, -np.inf).max() - np.where(can_up, grad, np.inf).min()
    )
    raise NumericalError(
        f"SMO did not converge within {max_steps} steps (KKT violation {residual:.3e})",
        residual=residual,
    )


def _recover_rho(alpha: np.ndarray, grad: np.ndarray, box: float) -> float:
    """Offset from unbounded support vectors, else the KKT interval midpoint."""
    free = (alpha > 0.0) & (alpha < box)
    if free.any():
        return float(grad[free].mean())
    lower = grad[alpha == box]
    upper = grad[alpha == 0.0]
    if lower.size and upper.size:
        return float((lower.max() + upper.min()) / 2.0)
    if lower.size:
        return float(lower.max())
    return float(upper.min())


def train(
    data: np.ndarray,
    nu: float,
    p: KernelParams,
    *,
    tol: float = KKT_TOLERANCE,
    max_steps: int = MAX_STEPS,
    scaler: Optional[Scaler] = None,
    schema: tuple[str, ...] = (),
) -> OcSvmModel:
    """Fit the one-class boundary on already-standardised rows of ``data``.

    nu in (0, 1] bounds the training-outlier fraction from above and the
    support-vector fraction from below. Training is deterministic: fixed
    uniform initialisation and lowest-index tie-breaking.
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] < 1:
        raise ValidationError("training data must be a non-empty 2-D array")
    if not 0.0 < nu <= 1.0:
        raise ValidationError(f"nu must lie in (0, 1], got {nu}")
    m = data.shape[0]
    box = 1.0 / (nu * m)
    kernel = rbf_kernel_matrix(data, data, p.gamma)
    alpha, grad = _solve_dual(kernel, box, tol, max_steps)
    rho = _recover_rho(alpha, grad, box)
    scores = grad - rho
    keep = alpha > 0.0
    return OcSvmModel(
        support_vectors=data[keep].copy(),
        alphas=alpha[keep].copy(),
        rho=rho,
        params=p,
        nu=nu,
        train_score_mean=float(scores.mean()),
        train_score_std=float(scores.std()),
        scaler=scaler,
        schema=schema,
    )


def decision_values(model: OcSvmModel, vectors: np.ndarray) -> np.ndarray:
    """Signed distances sum_i a_i K(x_i, v) - rho for each row of ``vectors``."""
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim == 1:
        vectors = vectors[None, :]
    if vectors.shape[1] != model.dim:
        raise ValidationError(
            f"expected {model.dim}-dimensional vectors, got {vectors.shape[1]}"
        )
    kernel = rbf_kernel_matrix(vectors, model.support_vectors, model.params.gamma)
    return kernel @ model.alphas - model.rho


def decision_value(model: OcSvmModel, v: np.ndarray) -> float:
    return float(decision_values(model, np.asarray(v))[0])


def classify(model: OcSvmModel, v: np.ndarray) -> Classification:
    """Authentic iff the decision value is >= 0 (sign(0) counts as inside)."""
    return (
        Classification.AUTHENTIC
        if decision_value(model, v) >= 0.0
        else Classification.ANOMALOUS
    )
