"""Per-region reference-spectrum and intensity estimation from coded data.

A homogeneous region is modeled as d_n ~ psi_n * H_n s + noise, where s is
the region's reference spectrum, psi_n a per-pixel intensity factor close
to 1, and H_n the pixel's sensing matrix. The spectrum is recovered by
Tikhonov-regularized least squares with a second-difference smoothness
penalty, solved exactly through the bands x bands normal equations; no
full-cube reconstruction is ever performed.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .acquisition import predict_pixel, unit_predictions
from .exceptions import DegeneratePixelError, DegenerateRegionError, RankDeficientError
from .validation import as_region

_CHUNK = 8192  # pixels per normal-equation accumulation block


@dataclass
class RegionModel:
    """A fitted region: pixels, reference spectrum, intensities, residual stats.

    region holds sorted row-major flat pixel indices; intensities is aligned
    with it. noise_var is the dof-corrected residual variance used by the
    growth gate; gaussianity fields are filled by the classifier.
    """

    region: np.ndarray
    spectrum: np.ndarray
    intensities: np.ndarray
    residual_rms: float = 0.0
    noise_var: float = 0.0
    gaussianity_stat: float = float("nan")
    gaussianity_pass: bool = False
    clamped_mass: float = 0.0
    reg_weight: float = 0.0

    def __post_init__(self):
        self.region = np.asarray(self.region, dtype=np.int64)
        self.spectrum = np.asarray(self.spectrum, dtype=np.float64)
        self.intensities = np.asarray(self.intensities, dtype=np.float64)
        if self.region.size == 0:
            raise ValueError("region must be nonempty")
        if self.intensities.shape != self.region.shape:
            raise ValueError("every region pixel needs an intensity coefficient")
        if self.residual_rms < 0:
            raise ValueError("residual_rms must be nonnegative")

    @property
    def size(self):
        return self.region.size


def intensity_from_pan(pan, region):
    """Per-pixel intensity factors from the panchromatic image.

    Each region pixel's pan value divided by the region's mean pan value;
    the result averages to 1 over the region by construction.
    """
    pan = np.asarray(pan, dtype=np.float64)
    flat = as_region(region, pan.shape)
    vals = pan.ravel()[flat]
    mean = vals.mean()
    if mean == 0.0:
        raise DegenerateRegionError("panchromatic mean of the region is zero")
    return vals / mean


def second_difference(bands):
    """(bands-2) x bands second-difference operator; empty for bands < 3."""
    n = max(bands - 2, 0)
    d2 = np.zeros((n, bands))
    for i in range(n):
        d2[i, i] = 1.0
        d2[i, i + 1] = -2.0
        d2[i, i + 2] = 1.0
    return d2


def estimate_spectrum(acq, masks, region, intensities, reg_weight=None,
                      full_output=False):
    """Region reference spectrum by regularized least squares.

    Minimizes sum_n ||d_n - psi_n H_n s||^2 + reg_weight * ||D2 s||^2 over s,
    solved exactly via the symmetric normal equations. reg_weight = None
    picks 1e-3 * trace(gram)/bands (scale-relative). Negative entries of the
    solution are clamped to 0 after solving; the clamped mass is reported in
    the info dict when full_output is set.

    Raises RankDeficientError when the normal matrix is singular (typically
    reg_weight = 0 with rank-deficient sensing).
    """
    bands = masks.bands
    flat = as_region(region, (acq.rows, acq.cols))
    psi = np.asarray(intensities, dtype=np.float64)
    if psi.shape != flat.shape:
        raise ValueError("intensities must align with the region pixels")
    if flat.size * acq.count < bands:
        warnings.warn(
            f"region supplies {flat.size * acq.count} equations for {bands} unknowns; "
            "spectrum estimate will lean on the regularizer", UserWarning, stacklevel=2)

    rows_idx, cols_idx = np.unravel_index(flat, (acq.rows, acq.cols))
    win = masks.windows()
    gram = np.zeros((bands, bands))
    rhs = np.zeros(bands)
    for start in range(0, flat.size, _CHUNK):
        sl = slice(start, start + _CHUNK)
        sel = win[:, rows_idx[sl], cols_idx[sl], :].astype(np.float64)  # (A, n, W)
        weighted = sel * psi[sl][None, :, None]
        stacked = weighted.transpose(1, 0, 2).reshape(-1, bands)        # (n*A, W)
        gram += stacked.T @ stacked
        data = acq.coded[rows_idx[sl], cols_idx[sl], :].reshape(-1)     # (n*A,)
        rhs += stacked.T @ data

    if reg_weight is None:
        reg_weight = 1e-3 * np.trace(gram) / bands
    if reg_weight < 0:
        raise ValueError("reg_weight must be nonnegative")
    normal = gram
    if reg_weight > 0 and bands >= 3:
        d2 = second_difference(bands)
        normal = gram + reg_weight * (d2.T @ d2)

    try:
        solution = scipy.linalg.solve(normal, rhs, assume_a="pos")
    except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
        raise RankDeficientError(
            "normal matrix is singular: the masks do not determine a spectrum "
            "on this region; use reg_weight > 0") from exc
    clamped_mass = float(np.abs(solution[solution < 0]).sum())
    spectrum = np.maximum(solution, 0.0)
    if full_output:
        return spectrum, {"reg_weight": float(reg_weight), "clamped_mass": clamped_mass}
    return spectrum


def refine_intensity(acq, masks, spectrum, pixel):
    """Scalar least-squares intensity for one pixel against a spectrum.

    Returns <d0, d_n> / ||d0||^2 with d0 the unit-intensity prediction; this
    minimizes ||d_n - psi * d0||^2 over psi.
    """
    d0 = predict_pixel(masks, pixel, spectrum, 1.0)
    denom = float(d0 @ d0)
    if denom == 0.0:
        raise DegeneratePixelError(
            f"mask blocks every band at pixel {tuple(pixel)}; intensity undefined")
    row, col = pixel
    return float(d0 @ acq.coded[row, col, :]) / denom


def refine_intensity_region(acq, masks, spectrum, region):
    """Vectorized refine_intensity over a region (sorted flat indices)."""
    flat = as_region(region, (acq.rows, acq.cols))
    preds = unit_predictions(masks, flat, spectrum)          # (n, A)
    denom = np.einsum("na,na->n", preds, preds)
    if np.any(denom == 0.0):
        bad = flat[np.flatnonzero(denom == 0.0)[0]]
        raise DegeneratePixelError(f"mask blocks every band at flat pixel {int(bad)}")
    rows_idx, cols_idx = np.unravel_index(flat, (acq.rows, acq.cols))
    data = acq.coded[rows_idx, cols_idx, :]                  # (n, A)
    return np.einsum("na,na->n", preds, data) / denom


def pooled_residuals(acq, masks, region, spectrum, intensities):
    """Prediction-minus-data residuals pooled over a region.

    Concatenates d_hat_n - d_n over the region in row-major pixel order;
    returns (vector of length n*A, residual rms).
    """
    flat = as_region(region, (acq.rows, acq.cols))
    psi = np.asarray(intensities, dtype=np.float64)
    preds = unit_predictions(masks, flat, spectrum) * psi[:, None]
    rows_idx, cols_idx = np.unravel_index(flat, (acq.rows, acq.cols))
    res = (preds - acq.coded[rows_idx, cols_idx, :]).reshape(-1)
    return res, float(np.sqrt(np.mean(res ** 2)))


def residuals(acq, masks, model):
    """Pooled residual vector and rms of a fitted RegionModel."""
    return pooled_residuals(acq, masks, model.region, model.spectrum, model.intensities)


def studentized_residuals(acq, masks, region, spectrum, intensities):
    """Residuals rescaled to common variance for distribution testing.

    Fitting the per-pixel intensity projects each pixel's noise onto the
    complement of its prediction direction u_n, so raw residual entry j has
    variance sigma^2 * (1 - u_nj^2): the pooled raw vector is a scale
    mixture whose excess kurtosis a normality test on a large region will
    flag even under an exactly Gaussian noise model. Dividing each entry by
    sqrt(1 - u_nj^2) restores identical marginal variances. Entries with a
    factor below 1e-2 are dropped (the intensity fit absorbed them; they
    are deterministically near zero).

    Returns (standardized vector, raw rms).
    """
    flat = as_region(region, (acq.rows, acq.cols))
    psi = np.asarray(intensities, dtype=np.float64)
    preds = unit_predictions(masks, flat, spectrum)          # (n, A)
    rows_idx, cols_idx = np.unravel_index(flat, (acq.rows, acq.cols))
    res = preds * psi[:, None] - acq.coded[rows_idx, cols_idx, :]
    rms = float(np.sqrt(np.mean(res ** 2)))
    norms2 = np.einsum("na,na->n", preds, preds)
    norms2 = np.where(norms2 > 0.0, norms2, 1.0)
    factor = np.sqrt(np.maximum(1.0 - preds ** 2 / norms2[:, None], 0.0))
    keep = factor > 1e-2
    return (res[keep] / factor[keep]).ravel(), rms


def noise_variance(residual_rms, n_pixels, count):
    """Dof-corrected residual variance estimate.

    The per-pixel intensity fit absorbs one of the ``count`` residual dofs
    per pixel; for count = 1 the residuals are identically zero and the raw
    mean square is returned.
    """
    if count > 1:
        return residual_rms ** 2 * count / (count - 1)
    return residual_rms ** 2


def region_objective(acq, masks, region, intensities, spectrum, reg_weight):
    """Value of the regularized least-squares objective for given parameters."""
    res, _ = pooled_residuals(acq, masks, region, spectrum, intensities)
    value = float(res @ res)
    if reg_weight > 0 and masks.bands >= 3:
        d2s = second_difference(masks.bands) @ np.asarray(spectrum, dtype=np.float64)
        value += reg_weight * float(d2s @ d2s)
    return value
