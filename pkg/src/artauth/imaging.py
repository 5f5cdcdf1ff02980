"""Image loading and preprocessing.

All feature extraction runs on rasters produced here. The preprocessing
chain is deterministic: identical input bytes and config always yield
identical output rasters.

Pipeline order used by the feature extractor:

* visual images:  decode -> bicubic resize -> (colour stats taken here)
  -> luminance grayscale -> CLAHE
* X-ray images:   decode -> bicubic resize -> min-max exposure stretch
  -> CLAHE

Gray-level quantisation (for co-occurrence and histogram statistics)
happens last and only where a descriptor needs it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ValidationError

__all__ = [
    "Channels",
    "RasterImage",
    "PreprocessConfig",
    "load_image",
    "save_png",
    "resize_bicubic",
    "apply_clahe",
    "to_grayscale",
    "quantise",
    "stretch_range",
]


class Channels(enum.Enum):
    GRAY8 = "gray8"
    GRAY16 = "gray16"
    RGB8 = "rgb8"


_DTYPES = {
    Channels.GRAY8: np.uint8,
    Channels.GRAY16: np.uint16,
    Channels.RGB8: np.uint8,
}


@dataclass(frozen=True)
class RasterImage:
    """Decoded image: row-major pixel array plus channel layout.

    ``pixels`` has shape (height, width) for grayscale and
    (height, width, 3) for RGB, dtype uint8 or uint16.
    """

    width: int
    height: int
    channels: Channels
    pixels: np.ndarray

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValidationError(
                f"image dimensions must be positive, got {self.width}x{self.height}"
            )
        expected = (self.height, self.width)
        if self.channels is Channels.RGB8:
            expected = (self.height, self.width, 3)
        if self.pixels.shape != expected:
            raise ValidationError(
                f"pixel array shape {self.pixels.shape} does not match {expected}"
            )
        if self.pixels.dtype != _DTYPES[self.channels]:
            raise ValidationError(
                f"pixel dtype {self.pixels.dtype} invalid for {self.channels.value}"
            )

    @property
    def depth_max(self) -> int:
        return 65535 if self.channels is Channels.GRAY16 else 255

    @property
    def is_gray(self) -> bool:
        return self.channels in (Channels.GRAY8, Channels.GRAY16)

    @classmethod
    def from_array(cls, pixels: np.ndarray, channels: Channels) -> "RasterImage":
        pixels = np.ascontiguousarray(pixels, dtype=_DTYPES[channels])
        h, w = pixels.shape[:2]
        return cls(width=w, height=h, channels=channels, pixels=pixels)


@dataclass(frozen=True)
class PreprocessConfig:
    """Preprocessing knobs.

    target_size: square edge after resize, pixels.
    clahe_clip_limit: histogram clip factor relative to a uniform bin.
    clahe_tile_grid: tiles per axis.
    gray_levels: quantisation level count for co-occurrence/histograms.
    """

    target_size: int = 512
    clahe_clip_limit: float = 2.0
    clahe_tile_grid: int = 8
    gray_levels: int = 32

    def __post_init__(self):
        if self.target_size < 32:
            raise ValidationError(f"target_size must be >= 32, got {self.target_size}")
        if not 2 <= self.gray_levels <= 256:
            raise ValidationError(
                f"gray_levels must be in [2, 256], got {self.gray_levels}"
            )
        if self.clahe_clip_limit <= 0:
            raise ValidationError("clahe_clip_limit must be positive")
        if self.clahe_tile_grid < 1:
            raise ValidationError("clahe_tile_grid must be >= 1")


def load_image(path: str | Path) -> RasterImage:
    """Decode a PNG/JPEG/TIFF file.

    8-bit grayscale, 8-bit RGB and 16-bit grayscale inputs are supported;
    16-bit data keeps its full depth. Palette images are expanded to RGB.
    """
    path = Path(path)
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode == "P":
                im = im.convert("RGB")
                mode = "RGB"
            if mode == "L":
                arr = np.asarray(im, dtype=np.uint8)
                channels = Channels.GRAY8
            elif mode in ("I;16", "I;16L", "I;16B", "I"):
                arr = np.asarray(im, dtype=np.int64)
                if arr.min() < 0 or arr.max() > 65535:
                    raise ValidationError(
                        f"{path}: integer image values outside 16-bit range"
                    )
                arr = arr.astype(np.uint16)
                channels = Channels.GRAY16
            elif mode == "RGB":
                arr = np.asarray(im, dtype=np.uint8)
                channels = Channels.RGB8
            else:
                raise ValidationError(
                    f"{path}: unsupported image mode {mode!r} "
                    "(expected 8-bit gray/RGB or 16-bit gray)"
                )
    except FileNotFoundError as exc:
        raise ValidationError(f"cannot read image file {path}") from exc
    except UnidentifiedImageError as exc:
        raise ValidationError(f"{path}: not a recognised image format") from exc
    except (OSError, SyntaxError) as exc:
        raise ValidationError(f"{path}: failed to decode image ({exc})") from exc
    if arr.ndim == 0 or arr.size == 0:
        raise ValidationError(f"{path}: image has zero dimension")
    return RasterImage.from_array(arr, channels)


def save_png(img: RasterImage, path: str | Path) -> None:
    """Write a raster as PNG (8-bit gray/RGB or 16-bit gray)."""
    if img.channels is Channels.GRAY16:
        pil = Image.fromarray(img.pixels.astype(np.uint16), mode="I;16")
    else:
        pil = Image.fromarray(img.pixels)
    pil.save(Path(path), format="PNG")


def _cubic_weight(t: np.ndarray) -> np.ndarray:
    # Keys bicubic kernel with a = -0.5 (Catmull-Rom): reproduces linear
    # ramps exactly and is the identity at integer sample positions.
    at = np.abs(t)
    w = np.zeros_like(at)
    near = at <= 1.0
    far = (at > 1.0) & (at < 2.0)
    w[near] = ((1.5 * at[near] - 2.5) * at[near]) * at[near] + 1.0
    w[far] = ((-0.5 * at[far] + 2.5) * at[far] - 4.0) * at[far] + 2.0
    return w


def _resample_axis(arr: np.ndarray, n_out: int) -> np.ndarray:
    """Bicubic resampling of axis 0, float64 in/out, edge-clamped taps."""
    n_in = arr.shape[0]
    dst = np.arange(n_out, dtype=np.float64)
    src = (dst + 0.5) * (n_in / n_out) - 0.5
    base = np.floor(src)
    t = src - base
    idx = base.astype(np.int64)[:, None] + np.arange(-1, 3)[None, :]
    idx = np.clip(idx, 0, n_in - 1)
    offsets = np.arange(-1, 3, dtype=np.float64)[None, :]
    weights = _cubic_weight(t[:, None] - offsets)
    weights /= weights.sum(axis=1, keepdims=True)
    taps = arr[idx]  # (n_out, 4, ...)
    w = weights.reshape(weights.shape + (1,) * (taps.ndim - 2))
    return (taps * w).sum(axis=1)


def resize_bicubic(img: RasterImage, target_size: int) -> RasterImage:
    """Resize to target_size x target_size with Catmull-Rom bicubic.

    Non-square inputs are stretched anisotropically; a same-size input
    comes back pixel-identical.
    """
    if target_size < 1:
        raise ValidationError("target_size must be positive")
    if img.width == target_size and img.height == target_size:
        return RasterImage.from_array(img.pixels.copy(), img.channels)
    vals = img.pixels.astype(np.float64)
    vals = _resample_axis(vals, target_size)
    vals = np.swapaxes(_resample_axis(np.swapaxes(vals, 0, 1), target_size), 0, 1)
    vals = np.clip(np.floor(vals + 0.5), 0, img.depth_max)
    return RasterImage.from_array(vals, img.channels)


# CLAHE histograms use at most 256 bins; 16-bit rasters are binned by
# their high byte but remapped over the full 16-bit output range.
_CLAHE_BINS = 256


def clahe_tile_edges(extent: int, tiles: int) -> list[int]:
    """Tile boundary positions: floor(i * extent / tiles) for i in 0..tiles."""
    return [(i * extent) // tiles for i in range(tiles + 1)]


def _clip_histogram(hist: np.ndarray, clip_limit: float, area: int) -> np.ndarray:
    """Clip a tile histogram and redistribute the excess uniformly.

    The threshold is clip_limit times the uniform bin height, floored,
    never below 1. The integer excess is spread evenly; the remainder
    goes one count each to the lowest-index bins.
    """
    n_bins = hist.shape[0]
    threshold = max(1, int(clip_limit * area / n_bins))
    excess = int(np.maximum(hist - threshold, 0).sum())
    clipped = np.minimum(hist, threshold).astype(np.int64)
    clipped += excess // n_bins
    clipped[: excess % n_bins] += 1
    return clipped


def apply_clahe(img: RasterImage, cfg: PreprocessConfig) -> RasterImage:
    """Contrast-limited adaptive histogram equalisation.

    Per-tile histograms are clipped (see ``_clip_histogram``) and turned
    into cumulative lookup tables scaled across the full pixel depth.
    Pixel values are remapped by bilinear interpolation between the four
    nearest tile lookup tables (clamped at borders), so tile seams do not
    produce artificial edges. Output dimensions and depth match the input.
    """
    if not img.is_gray:
        raise ValidationError("CLAHE requires a single-channel image")
    grid = cfg.clahe_tile_grid
    h, w = img.height, img.width
    if grid > min(h, w):
        raise ValidationError(
            f"tile grid {grid} exceeds image extent {min(h, w)}"
        )
    depth_max = img.depth_max
    shift = 8 if img.channels is Channels.GRAY16 else 0
    bins = (img.pixels.astype(np.int64) >> shift) if shift else img.pixels.astype(np.int64)

    r_edges = clahe_tile_edges(h, grid)
    c_edges = clahe_tile_edges(w, grid)
    luts = np.empty((grid, grid, _CLAHE_BINS), dtype=np.float64)
    centers_r = np.empty(grid)
    centers_c = np.empty(grid)
    for ti in range(grid):
        r0, r1 = r_edges[ti], r_edges[ti + 1]
        centers_r[ti] = (r0 + r1 - 1) / 2.0
        for tj in range(grid):
            c0, c1 = c_edges[tj], c_edges[tj + 1]
            if ti == 0:
                centers_c[tj] = (c0 + c1 - 1) / 2.0
            tile = bins[r0:r1, c0:c1]
            area = tile.size
            hist = np.bincount(tile.ravel(), minlength=_CLAHE_BINS)
            hist = _clip_histogram(hist, cfg.clahe_clip_limit, area)
            cdf = np.cumsum(hist, dtype=np.float64)
            luts[ti, tj] = np.floor(cdf * depth_max / area + 0.5)

    rows = np.arange(h, dtype=np.float64)
    cols = np.arange(w, dtype=np.float64)
    i1 = np.clip(np.searchsorted(centers_r, rows, side="left"), 0, grid - 1)
    i0 = np.clip(i1 - 1, 0, grid - 1)
    j1 = np.clip(np.searchsorted(centers_c, cols, side="left"), 0, grid - 1)
    j0 = np.clip(j1 - 1, 0, grid - 1)
    span_r = centers_r[i1] - centers_r[i0]
    span_c = centers_c[j1] - centers_c[j0]
    fy = np.where(span_r > 0, (rows - centers_r[i0]) / np.where(span_r > 0, span_r, 1.0), 0.0)
    fx = np.where(span_c > 0, (cols - centers_c[j0]) / np.where(span_c > 0, span_c, 1.0), 0.0)
    fy = np.clip(fy, 0.0, 1.0)
    fx = np.clip(fx, 0.0, 1.0)

    i0g = i0[:, None]
    i1g = i1[:, None]
    j0g = j0[None, :]
    j1g = j1[None, :]
    l00 = luts[i0g, j0g, bins]
    l01 = luts[i0g, j1g, bins]
    l10 = luts[i1g, j0g, bins]
    l11 = luts[i1g, j1g, bins]
    fxg = fx[None, :]
    fyg = fy[:, None]
    v0 = l00 * (1.0 - fxg) + l01 * fxg
    v1 = l10 * (1.0 - fxg) + l11 * fxg
    out = v0 * (1.0 - fyg) + v1 * fyg
    out = np.clip(np.floor(out + 0.5), 0, depth_max)
    return RasterImage.from_array(out, img.channels)


def to_grayscale(img: RasterImage) -> RasterImage:
    """Luminance grayscale: 0.299 R + 0.587 G + 0.114 B, rounded half up."""
    if img.is_gray:
        return img
    rgb = img.pixels.astype(np.float64)
    lum = 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]
    lum = np.clip(np.floor(lum + 0.5), 0, 255)
    return RasterImage.from_array(lum, Channels.GRAY8)


def quantise(img: RasterImage, levels: int) -> RasterImage:
    """Map intensities onto [0, levels-1] via floor(p * levels / (depth+1))."""
    if not img.is_gray:
        raise ValidationError("quantisation requires a single-channel image")
    if not 2 <= levels <= 256:
        raise ValidationError(f"levels must be in [2, 256], got {levels}")
    q = (img.pixels.astype(np.int64) * levels) // (img.depth_max + 1)
    return RasterImage.from_array(q.astype(np.uint8), Channels.GRAY8)


def stretch_range(img: RasterImage) -> RasterImage:
    """Min-max stretch to the full pixel depth (X-ray exposure normalisation).

    A constant image is returned unchanged.
    """
    if not img.is_gray:
        raise ValidationError("range stretch requires a single-channel image")
    lo = int(img.pixels.min())
    hi = int(img.pixels.max())
    if hi == lo:
        return RasterImage.from_array(img.pixels.copy(), img.channels)
    vals = (img.pixels.astype(np.float64) - lo) * (img.depth_max / (hi - lo))
    vals = np.clip(np.floor(vals + 0.5), 0, img.depth_max)
    return RasterImage.from_array(vals, img.channels)
