"""Seeded synthetic corpus of paired visual/X-ray texture images.

Stands in for a real paired-painting dataset at desk scale. Authentic
pairs come from one procedural family: multi-octave value noise with a
fixed spectral slope, where both modalities share a structure field so
they are correlated but not identical. Forgeries perturb the spectral
slope and palette of exactly one modality per painting (alternating), so
a single-modality model is systematically blind to half of them while
the fused representation sees every perturbation.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .imaging import Channels, RasterImage, save_png

__all__ = ["CorpusSpec", "PaintingSample", "generate_corpus", "write_corpus"]

LABEL_AUTHENTIC = "authentic"
LABEL_FORGERY = "forgery"


@dataclass(frozen=True)
class CorpusSpec:
    """Corpus shape and texture parameters.

    ``forgery_perturbation`` scales how far forged textures drift from
    the authentic family: it shifts the noise persistence (spectral
    slope), the base frequency and the palette.
    """

    n_authentic: int = 24
    n_forgery: int = 24
    image_size: int = 512
    seed: int = 7
    base_cells: int = 4
    octaves: int = 6
    persistence: float = 0.5
    persistence_jitter: float = 0.06
    detail_weight: float = 0.35
    hue_center: float = 30.0
    hue_span: float = 40.0
    saturation: float = 0.45
    forgery_perturbation: float = 0.3

    def __post_init__(self):
        if self.n_authentic < 0 or self.n_forgery < 0:
            raise ValidationError("painting counts must be non-negative")
        if self.image_size < 32:
            raise ValidationError("image_size must be at least 32")
        if self.n_forgery > 0 and self.forgery_perturbation <= 0:
            raise ValidationError(
                "forgery_perturbation must be positive when forgeries are requested"
            )
        if not 0 < self.persistence < 1:
            raise ValidationError("persistence must lie in (0, 1)")
        if self.persistence_jitter < 0:
            raise ValidationError("persistence_jitter must be non-negative")
        if self.octaves < 1 or self.base_cells < 1:
            raise ValidationError("octaves and base_cells must be positive")


@dataclass(frozen=True)
class PaintingSample:
    painting_id: str
    visual: RasterImage
    xray: RasterImage
    label: str
    flavor: str | None = None  # which modality a forgery perturbs


def _fade(t: np.ndarray) -> np.ndarray:
    return t * t * t * (t * (t * 6.0 - 15.0) + 10.0)


def _value_noise(size: int, cells: int, rng: np.random.Generator) -> np.ndarray:
    """Smoothly interpolated random lattice, values in [0, 1]."""
    lattice = rng.random((cells + 2, cells + 2))
    coords = (np.arange(size) + 0.5) * (cells / size)
    idx = np.floor(coords).astype(np.int64)
    frac = _fade(coords - idx)
    yi, xi = np.meshgrid(idx, idx, indexing="ij")
    fy, fx = np.meshgrid(frac, frac, indexing="ij")
    v00 = lattice[yi, xi]
    v01 = lattice[yi, xi + 1]
    v10 = lattice[yi + 1, xi]
    v11 = lattice[yi + 1, xi + 1]
    top = v00 + fx * (v01 - v00)
    bottom = v10 + fx * (v11 - v10)
    return top + fy * (bottom - top)


def _fbm(
    size: int,
    base_cells: int,
    octaves: int,
    persistence: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Multi-octave value noise; persistence sets the spectral slope."""
    total = np.zeros((size, size))
    amplitude = 1.0
    norm = 0.0
    cells = base_cells
    for _ in range(octaves):
        cells = min(cells, size)  # no sub-pixel lattices
        total += amplitude * _value_noise(size, cells, rng)
        norm += amplitude
        amplitude *= persistence
        cells *= 2
    return total / norm


@dataclass(frozen=True)
class _Texture:
    persistence: float
    base_cells: int
    hue_center: float
    hue_span: float
    saturation: float


def _authentic_texture(spec: CorpusSpec) -> _Texture:
    return _Texture(
        persistence=spec.persistence,
        base_cells=spec.base_cells,
        hue_center=spec.hue_center,
        hue_span=spec.hue_span,
        saturation=spec.saturation,
    )


def _perturbed_texture(spec: CorpusSpec) -> _Texture:
    mag = spec.forgery_perturbation
    return _Texture(
        persistence=min(spec.persistence + mag, 0.92),
        base_cells=max(1, int(round(spec.base_cells * (1.0 + 2.0 * mag)))),
        hue_center=spec.hue_center + 600.0 * mag,
        hue_span=spec.hue_span * (1.0 + mag),
        saturation=min(spec.saturation + 0.5 * mag, 0.95),
    )


def _hsv_to_rgb(h_deg: np.ndarray, s: np.ndarray, v: np.ndarray) -> np.ndarray:
    h6 = (h_deg % 360.0) / 60.0
    sector = np.floor(h6).astype(np.int64) % 6
    f = h6 - np.floor(h6)
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    r = np.choose(sector, [v, q, p, p, t, v])
    g = np.choose(sector, [t, v, v, q, p, p])
    b = np.choose(sector, [p, p, t, v, v, q])
    return np.stack([r, g, b], axis=-1)


def _render_visual(
    spec: CorpusSpec,
    tex: _Texture,
    persistence: float,
    structure: np.ndarray,
    rng: np.random.Generator,
) -> RasterImage:
    size = spec.image_size
    detail = _fbm(size, tex.base_cells, spec.octaves, persistence, rng)
    field = (1.0 - spec.detail_weight) * structure + spec.detail_weight * detail
    hue_field = _fbm(size, tex.base_cells, 3, persistence, rng)
    value = 0.15 + 0.75 * field
    hue = tex.hue_center + tex.hue_span * (hue_field - 0.5)
    sat = np.clip(tex.saturation + 0.25 * (field - 0.5), 0.02, 1.0)
    rgb = _hsv_to_rgb(hue, sat, np.clip(value, 0.0, 1.0))
    pixels = np.floor(rgb * 255.0 + 0.5).astype(np.uint8)
    return RasterImage.from_array(pixels, Channels.RGB8)


def _render_xray(
    spec: CorpusSpec,
    tex: _Texture,
    persistence: float,
    structure: np.ndarray,
    rng: np.random.Generator,
) -> RasterImage:
    size = spec.image_size
    detail = _fbm(size, tex.base_cells, spec.octaves, persistence, rng)
    field = (1.0 - spec.detail_weight) * structure + spec.detail_weight * detail
    pixels = np.floor(np.clip(field, 0.0, 1.0) * 65535.0 + 0.5).astype(np.uint16)
    return RasterImage.from_array(pixels, Channels.GRAY16)


def _streams(seed: int, index: int) -> list[np.random.Generator]:
    root = np.random.SeedSequence(seed, spawn_key=(index,))
    return [np.random.default_rng(child) for child in root.spawn(4)]


def _make_pair(
    spec: CorpusSpec,
    index: int,
    visual_tex: _Texture,
    xray_tex: _Texture,
    decorrelate_xray: bool,
) -> tuple[RasterImage, RasterImage]:
    rng_shared, rng_visual, rng_xray, rng_alt = _streams(spec.seed, index)
    # One latent style draw per painting drives the spectral slope of both
    # modalities, so authentic feature variation is strongly correlated
    # across all descriptors (a painter's hand, not independent noise).
    latent = float(rng_shared.uniform(-0.5, 0.5))
    p_visual = visual_tex.persistence + spec.persistence_jitter * latent
    p_xray = xray_tex.persistence + spec.persistence_jitter * latent
    structure = _fbm(
        spec.image_size, visual_tex.base_cells, spec.octaves, p_visual, rng_shared
    )
    visual = _render_visual(spec, visual_tex, p_visual, structure, rng_visual)
    if decorrelate_xray:
        # Forged underlayer: its own structure field, unrelated to the surface.
        xray_structure = _fbm(
            spec.image_size, xray_tex.base_cells, spec.octaves, p_xray, rng_alt
        )
    else:
        xray_structure = structure
    xray = _render_xray(spec, xray_tex, p_xray, xray_structure, rng_xray)
    return visual, xray


def generate_corpus(spec: CorpusSpec) -> list[PaintingSample]:
    """Deterministically render every painting pair in the corpus.

    Per-painting RNG streams are derived from (seed, painting index), so
    generation order or parallel scheduling can never change the output.
    """
    samples = []
    authentic = _authentic_texture(spec)
    perturbed = _perturbed_texture(spec)
    for i in range(spec.n_authentic):
        visual, xray = _make_pair(spec, i, authentic, authentic, decorrelate_xray=False)
        samples.append(
            PaintingSample(
                painting_id=f"auth_{i:03d}",
                visual=visual,
                xray=xray,
                label=LABEL_AUTHENTIC,
            )
        )
    for j in range(spec.n_forgery):
        index = spec.n_authentic + j
        flavor = "visual" if j % 2 == 0 else "xray"
        if flavor == "visual":
            visual, xray = _make_pair(
                spec, index, perturbed, authentic, decorrelate_xray=True
            )
        else:
            visual, xray = _make_pair(
                spec, index, authentic, perturbed, decorrelate_xray=True
            )
        samples.append(
            PaintingSample(
                painting_id=f"forg_{j:03d}",
                visual=visual,
                xray=xray,
                label=LABEL_FORGERY,
                flavor=flavor,
            )
        )
    return samples


def write_corpus(samples: list[PaintingSample], out_dir: str | Path, spec: CorpusSpec) -> Path:
    """Write PNG pairs plus manifest.csv / manifest.json; returns the csv path.

    Image paths in the manifests are relative to the output directory.
    X-ray images are stored as 16-bit grayscale PNG.
    """
    from . import persistence  # local import to avoid a cycle

    out_dir = Path(out_dir)
    images = out_dir / "images"
    images.mkdir(parents=True, exist_ok=True)
    rows = []
    for sample in samples:
        visual_rel = f"images/{sample.painting_id}_visual.png"
        xray_rel = f"images/{sample.painting_id}_xray.png"
        save_png(sample.visual, out_dir / visual_rel)
        save_png(sample.xray, out_dir / xray_rel)
        rows.append(
            {
                "id": sample.painting_id,
                "visual_path": visual_rel,
                "xray_path": xray_rel,
                "label": sample.label,
                "flavor": sample.flavor,
            }
        )
    csv_lines = ["id,visual_path,xray_path,label"]
    for row in rows:
        csv_lines.append(
            f"{row['id']},{row['visual_path']},{row['xray_path']},{row['label']}"
        )
    csv_path = out_dir / "manifest.csv"
    persistence.atomic_write_text(csv_path, "\n".join(csv_lines) + "\n")
    manifest = {
        "seed": spec.seed,
        "spec": asdict(spec),
        "paintings": rows,
    }
    persistence.atomic_write_text(
        out_dir / "manifest.json", persistence.canonical_json(manifest) + "\n"
    )
    return csv_path
