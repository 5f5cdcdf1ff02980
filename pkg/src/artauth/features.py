"""Texture and statistical descriptors for one preprocessed image.

Each image yields exactly 14 values: four co-occurrence statistics,
three local-binary-pattern histogram statistics, four global intensity
statistics, and three colour statistics (visual) or their grayscale
substitutes (X-ray).
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError
from .imaging import (
    Channels,
    PreprocessConfig,
    RasterImage,
    apply_clahe,
    quantise,
    resize_bicubic,
    stretch_range,
    to_grayscale,
)

log = logging.getLogger(__name__)

__all__ = [
    "Modality",
    "GlcmMatrix",
    "LbpHistogram",
    "FeatureVector",
    "VISUAL_SCHEMA",
    "XRAY_SCHEMA",
    "DEFAULT_DISTANCES",
    "DEFAULT_ANGLES",
    "compute_glcm",
    "glcm_contrast",
    "glcm_homogeneity",
    "glcm_energy",
    "glcm_correlation",
    "compute_lbp_riu2",
    "lbp_statistics",
    "intensity_statistics",
    "colour_statistics",
    "grayscale_substitutes",
    "extract_features",
]


class Modality(enum.Enum):
    VISUAL = "visual"
    XRAY = "xray"


_SHARED_NAMES = (
    "glcm_contrast",
    "glcm_homogeneity",
    "glcm_energy",
    "glcm_correlation",
    "lbp_mean",
    "lbp_variance",
    "lbp_uniformity",
    "entropy",
    "intensity_energy",
    "intensity_mean",
    "intensity_std",
)
VISUAL_SCHEMA = _SHARED_NAMES + ("hue_variance", "saturation_mean", "value_mean")
XRAY_SCHEMA = _SHARED_NAMES + ("skewness", "kurtosis", "median")

DEFAULT_DISTANCES = (1, 2)
DEFAULT_ANGLES = (0, 45, 90, 135)

# Row/column step per orientation; symmetric accumulation makes the
# direction sign irrelevant.
_ANGLE_STEPS = {0: (0, 1), 45: (-1, 1), 90: (-1, 0), 135: (-1, -1)}


@dataclass(frozen=True)
class GlcmMatrix:
    """Pooled symmetric co-occurrence probability matrix."""

    levels: int
    probs: np.ndarray
    offsets: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.probs.shape != (self.levels, self.levels):
            raise ValidationError("co-occurrence matrix shape mismatch")


@dataclass(frozen=True)
class LbpHistogram:
    """Ten-bin riu2 histogram: codes 0..8 plus the non-uniform bin."""

    bins: np.ndarray
    total: int


@dataclass(frozen=True)
class FeatureVector:
    """Ordered 14-descriptor vector for one image of one modality."""

    values: np.ndarray
    schema: tuple[str, ...]
    modality: Modality

    def __post_init__(self):
        if self.values.shape != (14,) or len(self.schema) != 14:
            raise ValidationError("feature vector must have exactly 14 entries")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("feature vector contains non-finite values")


def compute_glcm(
    img: RasterImage,
    levels: int,
    distances: Iterable[int] = DEFAULT_DISTANCES,
    angles: Iterable[int] = DEFAULT_ANGLES,
) -> GlcmMatrix:
    """Pool symmetric pair counts over all (distance, angle) offsets.

    The input must already be quantised to ``levels`` gray levels. Pairs
    are counted in both directions for every offset, accumulated into one
    matrix, then normalised to sum 1.
    """
    if not img.is_gray:
        raise ValidationError("co-occurrence input must be single-channel")
    distances = tuple(distances)
    angles = tuple(angles)
    if not distances:
        raise ValidationError("at least one distance is required")
    bad = [a for a in angles if a not in _ANGLE_STEPS]
    if bad or not angles:
        raise ValidationError(f"angles must be drawn from {sorted(_ANGLE_STEPS)}")
    arr = img.pixels.astype(np.int64)
    if arr.max() >= levels:
        raise ValidationError(
            f"image has values >= {levels}; quantise before computing the matrix"
        )
    h, w = arr.shape
    counts = np.zeros((levels, levels), dtype=np.int64)
    offsets = []
    for d in distances:
        for angle in angles:
            dr, dc = _ANGLE_STEPS[angle]
            dr, dc = dr * d, dc * d
            if abs(dr) >= h or abs(dc) >= w:
                raise ValidationError(
                    f"image {w}x{h} too small for offset distance {d} at {angle} degrees"
                )
            r0, r1 = max(0, -dr), min(h, h - dr)
            c0, c1 = max(0, -dc), min(w, w - dc)
            a = arr[r0:r1, c0:c1].ravel()
            b = arr[r0 + dr : r1 + dr, c0 + dc : c1 + dc].ravel()
            pair = np.bincount(a * levels + b, minlength=levels * levels)
            pair = pair.reshape(levels, levels)
            counts += pair + pair.T
            offsets.append((d, angle))
    probs = counts / counts.sum()
    return GlcmMatrix(levels=levels, probs=probs, offsets=tuple(offsets))


def glcm_contrast(g: GlcmMatrix) -> float:
    i = np.arange(g.levels)
    diff = np.subtract.outer(i, i)
    return float((diff.astype(np.float64) ** 2 * g.probs).sum())


def glcm_homogeneity(g: GlcmMatrix) -> float:
    i = np.arange(g.levels)
    diff = np.abs(np.subtract.outer(i, i))
    return float((g.probs / (1.0 + diff)).sum())


def glcm_energy(g: GlcmMatrix) -> float:
    return float((g.probs**2).sum())


_DEGENERATE_SIGMA = 1e-12


def glcm_correlation(g: GlcmMatrix) -> float:
    """Marginal correlation of the pair distribution, in [-1, 1].

    A degenerate marginal (constant image) yields 0 by convention.
    """
    i = np.arange(g.levels, dtype=np.float64)
    p_i = g.probs.sum(axis=1)
    p_j = g.probs.sum(axis=0)
    mu_i = float(i @ p_i)
    mu_j = float(i @ p_j)
    var_i = float(((i - mu_i) ** 2) @ p_i)
    var_j = float(((i - mu_j) ** 2) @ p_j)
    if var_i <= _DEGENERATE_SIGMA or var_j <= _DEGENERATE_SIGMA:
        log.warning("degenerate co-occurrence marginal; correlation set to 0")
        return 0.0
    di = i - mu_i
    dj = i - mu_j
    cov = float(di @ g.probs @ dj)
    return cov / np.sqrt(var_i * var_j)


# Circular neighbour order at unit radius; diagonal samples use the
# 8-connected integer neighbours rather than interpolated positions.
_LBP_OFFSETS = ((0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1))


def compute_lbp_riu2(img: RasterImage) -> LbpHistogram:
    """Rotation-invariant uniform LBP (P=8, R=1) histogram.

    A neighbour counts as 1 when its intensity is >= the centre. Codes
    with at most two circular bit transitions map to their bit count
    (0..8); all other patterns share bin 9. Only interior pixels are
    coded.
    """
    if not img.is_gray:
        raise ValidationError("LBP input must be single-channel")
    if img.height < 3 or img.width < 3:
        raise ValidationError("LBP needs an image of at least 3x3")
    arr = img.pixels.astype(np.int64)
    center = arr[1:-1, 1:-1]
    h, w = center.shape
    bits = np.empty((8, h, w), dtype=np.int8)
    for p, (dr, dc) in enumerate(_LBP_OFFSETS):
        bits[p] = (arr[1 + dr : 1 + dr + h, 1 + dc : 1 + dc + w] >= center)
    transitions = np.abs(bits - np.roll(bits, -1, axis=0)).sum(axis=0)
    ones = bits.sum(axis=0, dtype=np.int64)
    codes = np.where(transitions <= 2, ones, 9)
    hist = np.bincount(codes.ravel(), minlength=10)
    return LbpHistogram(bins=hist, total=int(h * w))


def lbp_statistics(h: LbpHistogram) -> tuple[float, float, float]:
    """(mean, variance, uniformity) of the normalised 10-bin distribution."""
    if h.total <= 0:
        raise ValidationError("empty LBP histogram")
    p = h.bins / h.total
    k = np.arange(10, dtype=np.float64)
    mean = float(k @ p)
    variance = float(((k - mean) ** 2) @ p)
    uniformity = float((p**2).sum())
    return mean, variance, uniformity


def intensity_statistics(
    img: RasterImage, levels: int
) -> tuple[float, float, float, float]:
    """(entropy, energy, mean, std) of the intensity distribution.

    Entropy and energy use the ``levels``-bin quantised histogram; mean
    and population standard deviation use the raw intensities normalised
    to [0, 1] by pixel depth.
    """
    if not img.is_gray:
        raise ValidationError("intensity statistics need a single-channel image")
    q = quantise(img, levels).pixels
    hist = np.bincount(q.ravel(), minlength=levels)
    p = hist / hist.sum()
    nz = p > 0
    entropy = float(-(p[nz] @ np.log2(p[nz])))
    energy = float((p**2).sum())
    x = img.pixels.astype(np.float64) / img.depth_max
    mean = float(x.mean())
    std = float(x.std())
    return entropy, energy, mean, std


def _rgb_to_hsv(pixels: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised RGB -> (H degrees in [0, 360), S, V in [0, 1])."""
    rgb = pixels.astype(np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = rgb.max(axis=-1)
    c = v - rgb.min(axis=-1)
    s = np.where(v > 0, c / np.where(v > 0, v, 1.0), 0.0)
    safe_c = np.where(c > 0, c, 1.0)
    hr = ((g - b) / safe_c) % 6.0
    hg = (b - r) / safe_c + 2.0
    hb = (r - g) / safe_c + 4.0
    h6 = np.where(v == r, hr, np.where(v == g, hg, hb))
    h = np.where(c > 0, 60.0 * h6, 0.0)
    return h % 360.0, s, v


def colour_statistics(
    img: RasterImage, strict_linear_hue: bool = False
) -> tuple[float, float, float]:
    """(hue_variance, saturation_mean, value_mean) in HSV space.

    Hue dispersion is circular by default: one minus the mean resultant
    length of the hue unit vectors, which lies in [0, 1] and is invariant
    to the 0/360 wrap. ``strict_linear_hue`` switches to the plain
    variance of hue angles in degrees. Achromatic pixels (S = 0) are
    excluded from hue statistics; an entirely achromatic image has hue
    variance 0.
    """
    if img.channels is not Channels.RGB8:
        raise ValidationError(
            "colour statistics need an RGB image; use grayscale_substitutes"
        )
    h, s, v = _rgb_to_hsv(img.pixels)
    saturation_mean = float(s.mean())
    value_mean = float(v.mean())
    chromatic = s > 0
    if not chromatic.any():
        return 0.0, saturation_mean, value_mean
    hues = h[chromatic]
    if strict_linear_hue:
        hue_variance = float(((hues - hues.mean()) ** 2).mean())
    else:
        theta = np.deg2rad(hues)
        resultant = np.hypot(np.cos(theta).mean(), np.sin(theta).mean())
        hue_variance = float(1.0 - resultant)
    return hue_variance, saturation_mean, value_mean


def grayscale_substitutes(img: RasterImage) -> tuple[float, float, float]:
    """(skewness, excess kurtosis, median) of depth-normalised intensities.

    Stands in for the colour trio on radiographs. A zero-variance image
    yields (0, 0, median) by convention.
    """
    if not img.is_gray:
        raise ValidationError("grayscale substitutes need a single-channel image")
    x = img.pixels.astype(np.float64).ravel() / img.depth_max
    mu = x.mean()
    sigma = x.std()
    median = float(np.median(x))
    if sigma <= _DEGENERATE_SIGMA:
        return 0.0, 0.0, median
    z = (x - mu) / sigma
    skewness = float((z**3).mean())
    kurtosis = float((z**4).mean() - 3.0)
    return skewness, kurtosis, median


def extract_features(
    img: RasterImage,
    modality: Modality,
    cfg: PreprocessConfig,
    *,
    distances: Sequence[int] = DEFAULT_DISTANCES,
    angles: Sequence[int] = DEFAULT_ANGLES,
    strict_linear_hue: bool = False,
) -> FeatureVector:
    """Run the full preprocessing and descriptor pipeline on one image.

    Visual images must be RGB (colour statistics come from the resized,
    unequalised image); X-ray inputs get a min-max exposure stretch and
    may be 16-bit. Everything else is identical between modalities.
    """
    if modality is Modality.VISUAL:
        if img.channels is not Channels.RGB8:
            raise ValidationError("visual feature extraction requires an RGB image")
        resized = resize_bicubic(img, cfg.target_size)
        c_trio = colour_statistics(resized, strict_linear_hue)
        gray = to_grayscale(resized)
        equalised = apply_clahe(gray, cfg)
        schema = VISUAL_SCHEMA
    else:
        gray = to_grayscale(img)
        resized = resize_bicubic(gray, cfg.target_size)
        stretched = stretch_range(resized)
        equalised = apply_clahe(stretched, cfg)
        c_trio = grayscale_substitutes(equalised)
        schema = XRAY_SCHEMA

    quantised = quantise(equalised, cfg.gray_levels)
    glcm = compute_glcm(quantised, cfg.gray_levels, distances, angles)
    lbp_mean, lbp_var, lbp_unif = lbp_statistics(compute_lbp_riu2(equalised))
    entropy, energy, mean, std = intensity_statistics(equalised, cfg.gray_levels)

    values = np.array(
        [
            glcm_contrast(glcm),
            glcm_homogeneity(glcm),
            glcm_energy(glcm),
            glcm_correlation(glcm),
            lbp_mean,
            lbp_var,
            lbp_unif,
            entropy,
            energy,
            mean,
            std,
            c_trio[0],
            c_trio[1],
            c_trio[2],
        ],
        dtype=np.float64,
    )
    return FeatureVector(values=values, schema=schema, modality=modality)
