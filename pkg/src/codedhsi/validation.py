"""Input validation helpers shared across the package."""

import warnings

import numpy as np


def check_cube(cube, name="cube"):
    """Validate a hyperspectral cube and return it as float64 (rows, cols, bands)."""
    cube = np.asarray(cube, dtype=np.float64)
    if cube.ndim != 3:
        raise ValueError(f"{name} must be 3-D (rows, cols, bands), got shape {cube.shape}")
    if cube.size == 0:
        raise ValueError(f"{name} has a zero dimension: {cube.shape}")
    if not np.all(np.isfinite(cube)):
        raise ValueError(f"{name} contains non-finite values")
    return cube


def warn_reflectance_range(cube, name="cube"):
    """Warn (never reject) when reflectance values fall outside [0, 1]."""
    lo, hi = float(np.min(cube)), float(np.max(cube))
    if lo < 0.0 or hi > 1.0:
        warnings.warn(
            f"{name} has values outside [0, 1] (min {lo:.4g}, max {hi:.4g}); "
            "expected reflectance", UserWarning, stacklevel=2)


def check_label_map(labels, shape=None, name="labels"):
    """Validate a label map: integer grid, entries -1 (outside), 0 (unclassified) or >= 1."""
    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {labels.shape}")
    if not np.issubdtype(labels.dtype, np.integer):
        raise ValueError(f"{name} must be an integer array, got dtype {labels.dtype}")
    if shape is not None and labels.shape != tuple(shape):
        raise ValueError(f"{name} shape {labels.shape} does not match expected {tuple(shape)}")
    if labels.min(initial=0) < -1:
        raise ValueError(f"{name} contains values below -1")
    return labels


def as_region(region, shape):
    """Normalize a region to a sorted array of unique flat (row-major) pixel indices.

    Accepts flat indices, an iterable of (row, col) pairs, or a boolean mask.
    """
    rows, cols = shape
    region = np.asarray(region)
    if region.dtype == bool:
        if region.shape != (rows, cols):
            raise ValueError(f"boolean region mask shape {region.shape} != {shape}")
        flat = np.flatnonzero(region)
    elif region.ndim == 2 and region.shape[1] == 2:
        r = region[:, 0].astype(np.int64)
        c = region[:, 1].astype(np.int64)
        if np.any((r < 0) | (r >= rows) | (c < 0) | (c >= cols)):
            raise ValueError("region pixel coordinates out of bounds")
        flat = r * cols + c
    elif region.ndim == 1:
        flat = region.astype(np.int64)
        if flat.size and (flat.min() < 0 or flat.max() >= rows * cols):
            raise ValueError("region flat indices out of bounds")
    else:
        raise ValueError(f"cannot interpret region of shape {region.shape}")
    flat = np.unique(flat)
    if flat.size == 0:
        raise ValueError("region is empty")
    return flat


def region_from_labels(labels, region_id):
    """Flat indices of all pixels carrying ``region_id`` in a label map."""
    labels = np.asarray(labels)
    flat = np.flatnonzero(labels.ravel() == region_id)
    if flat.size == 0:
        raise ValueError(f"label {region_id} not present in label map")
    return flat
