"""Multimodal texture features and one-class SVM authentication toolkit.

The pipeline mirrors a paired-imaging authentication workflow: identical
texture/statistical descriptors over visual and X-ray images of the same
painting, feature fusion and z-score scaling, a one-class SVM with an
RBF kernel trained by a deterministic SMO solver, grouped
cross-validation with grid search, and PCA-based importance plus
confidence calibration on top of the decision scores.
"""

__version__ = "0.1.0"

from .errors import ArtAuthError, NumericalError, ValidationError
from .imaging import Channels, PreprocessConfig, RasterImage, load_image
from .features import (
    FeatureVector,
    Modality,
    VISUAL_SCHEMA,
    XRAY_SCHEMA,
    extract_features,
)
from .fusion import FusedVector, Scaler, fuse
from .ocsvm import Classification, KernelParams, OcSvmModel
from .modelsel import FeatureTable, GridConfig, grid_search
from .analysis import CalibratedScore, ImportanceReport, calibrate, feature_importance
from .synth import CorpusSpec, generate_corpus

__all__ = [
    "__version__",
    "ArtAuthError",
    "NumericalError",
    "ValidationError",
    "Channels",
    "PreprocessConfig",
    "RasterImage",
    "load_image",
    "FeatureVector",
    "Modality",
    "VISUAL_SCHEMA",
    "XRAY_SCHEMA",
    "extract_features",
    "FusedVector",
    "Scaler",
    "fuse",
    "Classification",
    "KernelParams",
    "OcSvmModel",
    "FeatureTable",
    "GridConfig",
    "grid_search",
    "CalibratedScore",
    "ImportanceReport",
    "calibrate",
    "feature_importance",
    "CorpusSpec",
    "generate_corpus",
]
