"""Synthetic scene generation for desk-scale verification.

Scenes follow the intensity-variability class model: every pixel of class k
carries the class reference spectrum scaled by a per-pixel intensity factor
drawn from Uniform[1-spread, 1+spread]. Reference spectra are smooth sums
of a few Gaussian bumps over the band index.
"""

from dataclasses import dataclass, field

import numpy as np

from .metrics import median_spectrum, sam


@dataclass
class SceneSpec:
    """Parameters of a synthetic scene.

    geometry is "tiles" (K near-equal rectangles) or "voronoi"
    (voronoi_seeds random sites, classes assigned round-robin; defaults to
    one site per class). Class spectra are rejection-sampled until every
    pair is at least min_separation_rad apart in spectral angle.
    """

    rows: int
    cols: int
    bands: int
    classes: int
    geometry: str = "tiles"
    voronoi_seeds: int | None = None
    intensity_spread: float = 0.05
    outlier_rate: float = 0.0
    rng_seed: int = 0
    min_separation_rad: float = 0.25

    def __post_init__(self):
        if min(self.rows, self.cols, self.bands, self.classes) < 1:
            raise ValueError("rows, cols, bands and classes must be positive")
        if self.classes > self.rows * self.cols:
            raise ValueError("more classes than pixels")
        if not 0.0 <= self.intensity_spread < 1.0:
            raise ValueError("intensity_spread must lie in [0, 1)")
        if not 0.0 <= self.outlier_rate < 1.0:
            raise ValueError("outlier_rate must lie in [0, 1)")
        if self.geometry not in ("tiles", "voronoi"):
            raise ValueError(f"unknown geometry {self.geometry!r}")
        if self.geometry == "voronoi":
            if self.voronoi_seeds is None:
                self.voronoi_seeds = self.classes
            if self.voronoi_seeds < self.classes:
                raise ValueError("voronoi_seeds must be >= classes")


@dataclass
class SynthScene:
    """A generated scene: cube, true labels, class spectra and intensity field."""

    cube: np.ndarray          # (rows, cols, bands)
    labels: np.ndarray        # (rows, cols), class ids 1..K
    spectra: np.ndarray       # (K, bands) reference spectra
    intensity: np.ndarray     # (rows, cols) per-pixel scale factors
    spec: SceneSpec = field(repr=False, default=None)


def random_smooth_spectrum(bands, rng, peak=1.0):
    """A smooth nonnegative spectrum: 2-4 Gaussian bumps, normalized to ``peak``."""
    n_bumps = int(rng.integers(2, 5))
    w = np.arange(bands, dtype=np.float64)
    s = np.zeros(bands)
    for _ in range(n_bumps):
        center = rng.uniform(0, bands - 1)
        width = rng.uniform(max(1.0, bands / 20.0), max(2.0, bands / 6.0))
        amp = rng.uniform(0.3, 1.0)
        s += amp * np.exp(-0.5 * ((w - center) / width) ** 2)
    return s * (peak / s.max())


def _separated_spectra(spec, rng):
    peak_cap = 1.0 / (1.0 + spec.intensity_spread)
    spectra = []
    for _ in range(spec.classes):
        for _ in range(1000):
            peak = rng.uniform(0.5, 1.0) * peak_cap
            cand = random_smooth_spectrum(spec.bands, rng, peak=peak)
            if all(sam(cand, s) > spec.min_separation_rad for s in spectra):
                spectra.append(cand)
                break
        else:
            raise ValueError(
                f"could not draw {spec.classes} spectra with pairwise separation "
                f"> {spec.min_separation_rad} rad; lower min_separation_rad")
    return np.array(spectra)


def _tile_labels(spec):
    k = spec.classes
    g_rows = 1
    for g in range(int(np.sqrt(k)), 0, -1):
        if k % g == 0:
            g_rows = g
            break
    g_cols = k // g_rows
    row_edges = np.linspace(0, spec.rows, g_rows + 1).astype(int)
    col_edges = np.linspace(0, spec.cols, g_cols + 1).astype(int)
    labels = np.zeros((spec.rows, spec.cols), dtype=np.int32)
    cid = 1
    for i in range(g_rows):
        for j in range(g_cols):
            labels[row_edges[i]:row_edges[i + 1], col_edges[j]:col_edges[j + 1]] = cid
            cid += 1
    return labels


def _voronoi_labels(spec, rng):
    sites = rng.choice(spec.rows * spec.cols, size=spec.voronoi_seeds, replace=False)
    sr, sc = np.unravel_index(sites, (spec.rows, spec.cols))
    site_class = 1 + np.arange(spec.voronoi_seeds) % spec.classes
    rr, cc = np.meshgrid(np.arange(spec.rows), np.arange(spec.cols), indexing="ij")
    d2 = (rr[:, :, None] - sr) ** 2 + (cc[:, :, None] - sc) ** 2
    nearest = np.argmin(d2, axis=2)  # ties break to the lowest site index
    return site_class[nearest].astype(np.int32)


def synth_scene(spec):
    """Generate a scene from its spec; deterministic for a given rng_seed."""
    rng = np.random.default_rng(spec.rng_seed)
    spectra = _separated_spectra(spec, rng)
    if spec.geometry == "tiles":
        labels = _tile_labels(spec)
    else:
        labels = _voronoi_labels(spec, rng)
    lo = 1.0 - spec.intensity_spread
    hi = 1.0 + spec.intensity_spread
    intensity = rng.uniform(lo, hi, size=(spec.rows, spec.cols))
    cube = intensity[:, :, None] * spectra[labels - 1]
    return SynthScene(cube=cube, labels=labels, spectra=spectra,
                      intensity=intensity, spec=spec)


def inject_outliers(cube, labels, rate, rng_seed=0, min_angle_rad=0.1):
    """Replace a fraction of labeled pixels with unrelated smooth spectra.

    Exactly floor(rate * n_labeled) pixels are altered, chosen without
    replacement. Each replacement is redrawn until its spectral angle to
    the pixel's class median exceeds min_angle_rad, so altered pixels are
    genuinely aberrant. Returns (modified copy, sorted flat indices of
    altered pixels).
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError("rate must lie in [0, 1)")
    cube = np.asarray(cube, dtype=np.float64)
    labels = np.asarray(labels)
    out = cube.copy()
    labeled = np.flatnonzero(labels.ravel() > 0)
    n_alter = int(rate * labeled.size)
    if n_alter == 0:
        return out, np.empty(0, dtype=np.int64)

    rng = np.random.default_rng(rng_seed)
    chosen = np.sort(rng.choice(labeled, size=n_alter, replace=False))
    medians = {}
    for k in np.unique(labels[labels > 0]):
        medians[int(k)] = median_spectrum(cube, labels == k)

    rows, cols = labels.shape
    for flat in chosen:
        ref = medians[int(labels.ravel()[flat])]
        for _ in range(1000):
            cand = random_smooth_spectrum(cube.shape[2], rng, peak=rng.uniform(0.3, 1.0))
            if sam(cand, ref) > min_angle_rad:
                break
        r, c = divmod(int(flat), cols)
        out[r, c, :] = cand
    return out, chosen
