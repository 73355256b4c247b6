"""Spectral similarity metrics and probability histograms."""

from dataclasses import dataclass

import numpy as np

from .exceptions import UndefinedAngleError
from .validation import as_region


def sam(s1, s2):
    """Spectral angle between two spectra, in radians within [0, pi].

    Intensity-invariant: scaling either spectrum by a positive factor does
    not change the angle.
    """
    s1 = np.asarray(s1, dtype=np.float64).ravel()
    s2 = np.asarray(s2, dtype=np.float64).ravel()
    if s1.shape != s2.shape:
        raise ValueError(f"spectra have different lengths: {s1.size} vs {s2.size}")
    n1 = np.linalg.norm(s1)
    n2 = np.linalg.norm(s2)
    if n1 == 0.0 or n2 == 0.0:
        raise UndefinedAngleError("spectral angle undefined for a zero spectrum")
    cosang = np.clip(np.dot(s1, s2) / (n1 * n2), -1.0, 1.0)
    return float(np.arccos(cosang))


def rmse(s1, s2):
    """Root mean square difference; bounded by 1 for reflectance in [0, 1]."""
    s1 = np.asarray(s1, dtype=np.float64).ravel()
    s2 = np.asarray(s2, dtype=np.float64).ravel()
    if s1.shape != s2.shape:
        raise ValueError(f"spectra have different lengths: {s1.size} vs {s2.size}")
    return float(np.sqrt(np.mean((s1 - s2) ** 2)))


def median_spectrum(cube, region):
    """Componentwise per-band median over a region's pixels.

    Even pixel counts average the lower and upper medians (numpy default).
    """
    cube = np.asarray(cube, dtype=np.float64)
    flat = as_region(region, cube.shape[:2])
    pixels = cube.reshape(-1, cube.shape[2])[flat]
    return np.median(pixels, axis=0)


def angles_to_reference(pixels, reference):
    """SAM of each row of ``pixels`` (n, bands) against one reference spectrum.

    Zero-norm rows get pi/2 (no direction information).
    """
    pixels = np.asarray(pixels, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64).ravel()
    nref = np.linalg.norm(reference)
    if nref == 0.0:
        raise UndefinedAngleError("spectral angle undefined for a zero reference")
    norms = np.linalg.norm(pixels, axis=1)
    safe = np.where(norms > 0.0, norms, 1.0)
    cosang = np.clip((pixels @ reference) / (safe * nref), -1.0, 1.0)
    cosang = np.where(norms > 0.0, cosang, 0.0)
    return np.arccos(cosang)


@dataclass
class MetricHistogram:
    """Probability-normalized histogram of a metric over a pixel population."""

    bin_edges: np.ndarray
    probabilities: np.ndarray
    metric_name: str = ""

    def __post_init__(self):
        self.bin_edges = np.asarray(self.bin_edges, dtype=np.float64)
        self.probabilities = np.asarray(self.probabilities, dtype=np.float64)
        if self.bin_edges.ndim != 1 or self.bin_edges.size < 2:
            raise ValueError("need at least 2 bin edges")
        if np.any(np.diff(self.bin_edges) <= 0):
            raise ValueError("bin edges must be strictly ascending")
        if self.probabilities.shape != (self.bin_edges.size - 1,):
            raise ValueError("probabilities must have one entry per bin")
        if np.any(self.probabilities < 0):
            raise ValueError("probabilities must be nonnegative")
        if abs(float(self.probabilities.sum()) - 1.0) > 1e-12:
            raise ValueError("probabilities must sum to 1")


def metric_histogram(values, bin_edges, metric_name=""):
    """Histogram of metric values, normalized to probabilities.

    Values outside the edge range are clamped into the end bins.
    """
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        raise ValueError("cannot histogram an empty value list")
    bin_edges = np.asarray(bin_edges, dtype=np.float64)
    if bin_edges.ndim != 1 or bin_edges.size < 2:
        raise ValueError("need at least 2 bin edges")
    if np.any(np.diff(bin_edges) <= 0):
        raise ValueError("bin edges must be strictly ascending")
    clamped = np.clip(values, bin_edges[0], bin_edges[-1])
    counts, _ = np.histogram(clamped, bins=bin_edges)
    return MetricHistogram(bin_edges, counts / values.size, metric_name)
