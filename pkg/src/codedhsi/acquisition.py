"""Coded-aperture acquisition model.

The scene cube is spectrally sheared (band w shifts w columns), projected
through a binary mask on the sheared grid, then integrated back onto the
detector: each detector pixel records a mask-weighted sum of its own
spectrum. Repeating the measurement with several mask configurations gives
a stack of coded frames; the mask-free measurement is the panchromatic
image.
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .validation import check_cube


@dataclass
class MaskSet:
    """Binary aperture masks on the sheared grid.

    masks has shape (count, rows, cols + bands - 1), entries in {0, 1}.
    The shear rule is fixed at one column per band: scene pixel (r, c)
    sees mask entry (r, c + w) for band w, so its sensing matrix is the
    (count, bands) window masks[:, r, c:c+bands].
    """

    masks: np.ndarray
    bands: int
    open_fraction: float | None = None
    rng_seed: int | None = None
    _windows: np.ndarray | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        self.masks = np.asarray(self.masks)
        if self.masks.ndim != 3:
            raise ValueError(f"masks must be 3-D (count, rows, sheared cols), got {self.masks.shape}")
        if self.bands < 1:
            raise ValueError("bands must be positive")
        if self.masks.shape[2] < self.bands:
            raise ValueError(
                f"sheared width {self.masks.shape[2]} too small for {self.bands} bands")
        vals = np.unique(self.masks)
        if not np.isin(vals, (0, 1)).all():
            raise ValueError("mask entries must be exactly 0 or 1")
        self.masks = self.masks.astype(np.uint8)

    @property
    def count(self):
        return self.masks.shape[0]

    @property
    def rows(self):
        return self.masks.shape[1]

    @property
    def cols(self):
        return self.masks.shape[2] - self.bands + 1

    @classmethod
    def all_open(cls, rows, cols, bands, count):
        """Degenerate fully-open mask set (every entry 1)."""
        if min(rows, cols, bands, count) < 1:
            raise ValueError("all dimensions must be positive")
        m = np.ones((count, rows, cols + bands - 1), dtype=np.uint8)
        return cls(m, bands=bands, open_fraction=1.0)

    def windows(self):
        """(count, rows, cols, bands) view: windows[a, r, c] is pixel (r, c)'s sensing row set."""
        if self._windows is None:
            self._windows = sliding_window_view(self.masks, self.bands, axis=2)
        return self._windows

    def pixel_operator(self, row, col):
        """The (count, bands) sensing matrix of one scene pixel."""
        if not (0 <= row < self.rows and 0 <= col < self.cols):
            raise ValueError(f"pixel ({row}, {col}) out of bounds for {self.rows}x{self.cols}")
        return self.masks[:, row, col:col + self.bands]


@dataclass
class AcquisitionStack:
    """Coded frames plus the panchromatic image for one scene.

    coded has shape (rows, cols, count); pan has shape (rows, cols).
    noise_sigma records the detector-noise standard deviation used at
    simulation time; it stays None for data of unknown provenance, while
    an exact 0.0 asserts the stack is noise-free (downstream statistical
    gates rely on the distinction).
    """

    coded: np.ndarray
    pan: np.ndarray
    noise_sigma: float | None = None

    def __post_init__(self):
        self.coded = np.asarray(self.coded, dtype=np.float64)
        self.pan = np.asarray(self.pan, dtype=np.float64)
        if self.coded.ndim != 3:
            raise ValueError(f"coded must be 3-D (rows, cols, count), got {self.coded.shape}")
        if self.pan.shape != self.coded.shape[:2]:
            raise ValueError(
                f"pan shape {self.pan.shape} does not match coded {self.coded.shape[:2]}")
        if not (np.all(np.isfinite(self.coded)) and np.all(np.isfinite(self.pan))):
            raise ValueError("acquisition values must be finite")
        if self.noise_sigma is not None and self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")

    @property
    def rows(self):
        return self.coded.shape[0]

    @property
    def cols(self):
        return self.coded.shape[1]

    @property
    def count(self):
        return self.coded.shape[2]


def gen_masks(rows, cols, bands, count, open_fraction=0.5, rng_seed=0):
    """Draw ``count`` independent Bernoulli masks on the sheared grid.

    Each entry is 1 with probability ``open_fraction``; deterministic for a
    given rng_seed.
    """
    if min(rows, cols, bands, count) < 1:
        raise ValueError("rows, cols, bands and count must all be positive")
    if not 0.0 < open_fraction < 1.0:
        raise ValueError(f"open_fraction must lie strictly in (0, 1), got {open_fraction}")
    rng = np.random.default_rng(rng_seed)
    m = (rng.random((count, rows, cols + bands - 1)) < open_fraction).astype(np.uint8)
    return MaskSet(m, bands=bands, open_fraction=open_fraction, rng_seed=rng_seed)


def acquire(cube, masks, noise_sigma=0.0, rng_seed=0):
    """Simulate the coded frames and the panchromatic image of a cube.

    coded(r, c, a) = sum_w masks[a, r, c+w] * cube(r, c, w) + noise and
    pan(r, c) = sum_w cube(r, c, w) + noise, with i.i.d. Gaussian detector
    noise of standard deviation noise_sigma drawn from a counter-based
    (Philox) stream keyed on rng_seed. noise_sigma = 0 gives exact sums.

    Both sums accumulate in ascending band order so that with all-open
    masks every coded frame is bit-identical to pan.
    """
    cube = check_cube(cube)
    rows, cols, bands = cube.shape
    if masks.bands != bands:
        raise ValueError(f"masks expect {masks.bands} bands, cube has {bands}")
    if (masks.rows, masks.cols) != (rows, cols):
        raise ValueError(
            f"masks are for a {masks.rows}x{masks.cols} scene, cube is {rows}x{cols}")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be nonnegative")

    coded = np.zeros((rows, cols, masks.count), dtype=np.float64)
    pan = np.zeros((rows, cols), dtype=np.float64)
    m = masks.masks
    for w in range(bands):
        band = cube[:, :, w]
        # masks[:, :, w:w+cols][a, r, c] is mask entry (r, c + w) of frame a
        coded += m[:, :, w:w + cols].transpose(1, 2, 0) * band[:, :, None]
        pan += band

    if noise_sigma > 0.0:
        gen = np.random.Generator(np.random.Philox(key=rng_seed))
        coded = coded + noise_sigma * gen.standard_normal(coded.shape)
        pan = pan + noise_sigma * gen.standard_normal(pan.shape)

    return AcquisitionStack(coded=coded, pan=pan, noise_sigma=float(noise_sigma))


def predict_pixel(masks, pixel, spectrum, intensity):
    """Predicted coded data for one pixel under a reference spectrum.

    Returns the length-count vector intensity * H_n @ spectrum, where H_n is
    the pixel's sensing matrix. Linear in both spectrum and intensity.
    """
    spectrum = np.asarray(spectrum, dtype=np.float64)
    if spectrum.shape != (masks.bands,):
        raise ValueError(f"spectrum must have length {masks.bands}, got {spectrum.shape}")
    if not np.isfinite(intensity):
        raise ValueError("intensity must be finite")
    row, col = pixel
    op = masks.pixel_operator(row, col)
    return float(intensity) * (op @ spectrum)


def unit_predictions(masks, flat_pixels, spectrum):
    """Unit-intensity predictions H_n @ spectrum for many pixels at once.

    flat_pixels are row-major flat indices; returns shape (n_pixels, count).
    """
    spectrum = np.asarray(spectrum, dtype=np.float64)
    rows_idx, cols_idx = np.unravel_index(np.asarray(flat_pixels), (masks.rows, masks.cols))
    win = masks.windows()  # (count, rows, cols, bands)
    sel = win[:, rows_idx, cols_idx, :]  # (count, n, bands)
    return np.einsum("anw,w->na", sel, spectrum)


def sigma_for_snr(coded, snr_db):
    """Noise standard deviation giving the requested SNR on a clean coded stack."""
    coded = np.asarray(coded, dtype=np.float64)
    rms = float(np.sqrt(np.mean(coded ** 2)))
    return rms / (10.0 ** (snr_db / 20.0))
