"""Variability audits of pixel labelings, ground truth included.

Every region (whether produced by the classifier or by a reference
labeling) is represented by its componentwise median spectrum; per-pixel
SAM and RMSE against that median quantify intra-region variability.
Auditing needs the full cube: with coded data only, these operations are
unavailable by design.
"""

from dataclasses import dataclass, replace

import numpy as np

from .classifier import classify
from .metrics import MetricHistogram, angles_to_reference, median_spectrum, metric_histogram
from .validation import as_region, check_cube, check_label_map, warn_reflectance_range

SENTINEL = -1.0  # map value for pixels without a region

DEFAULT_SAM_EDGES = np.linspace(0.0, 0.5, 65)
DEFAULT_RMSE_EDGES = np.linspace(0.0, 0.5, 65)


def sam_map(cube, labels):
    """Per-pixel spectral angle to the pixel's own region median.

    Unclassified and outside pixels carry the negative sentinel.
    """
    cube = check_cube(cube)
    labels = check_label_map(labels, cube.shape[:2])
    out = np.full(labels.shape, SENTINEL, dtype=np.float64)
    flat_cube = cube.reshape(-1, cube.shape[2])
    for k in np.unique(labels[labels > 0]):
        mask = labels == k
        median = median_spectrum(cube, mask)
        flat = np.flatnonzero(mask.ravel())
        out.ravel()[flat] = angles_to_reference(flat_cube[flat], median)
    return out


def exceedance(cube, region, threshold_rad):
    """Fraction of region pixels whose SAM to the region median exceeds the threshold."""
    cube = check_cube(cube)
    flat = as_region(region, cube.shape[:2])
    median = median_spectrum(cube, flat)
    angles = angles_to_reference(cube.reshape(-1, cube.shape[2])[flat], median)
    return float(np.mean(angles > threshold_rad))


def labeling_metric_values(cube, labels):
    """Per-pixel SAM and RMSE values to own-region medians, labeled pixels only.

    Returns (sam_values, rmse_values), each in row-major pixel order of the
    labeled pixels.
    """
    cube = check_cube(cube)
    labels = check_label_map(labels, cube.shape[:2])
    flat_cube = cube.reshape(-1, cube.shape[2])
    bands = cube.shape[2]
    ids = np.unique(labels[labels > 0])
    if ids.size == 0:
        raise ValueError("labeling has no labeled pixels to audit")
    sam_full = np.full(labels.size, np.nan)
    rmse_full = np.full(labels.size, np.nan)
    for k in ids:
        flat = np.flatnonzero(labels.ravel() == k)
        median = median_spectrum(cube, flat)
        pix = flat_cube[flat]
        sam_full[flat] = angles_to_reference(pix, median)
        rmse_full[flat] = np.sqrt(np.mean((pix - median) ** 2, axis=1))
    keep = ~np.isnan(sam_full)
    return sam_full[keep], rmse_full[keep]


@dataclass
class ClassAudit:
    """Variability statistics of one labeled class/region."""

    label: int
    count: int
    median_spectrum: np.ndarray
    mean_sam: float
    median_sam: float
    mean_rmse: float
    exceedance: float
    sam_hist: MetricHistogram
    rmse_hist: MetricHistogram


@dataclass
class AuditReport:
    """Per-class audit rows plus the global SAM map."""

    classes: list
    sam_map: np.ndarray
    threshold_rad: float = 0.1

    def table_rows(self):
        """CSV-ready rows: one per class."""
        header = ["label", "count", "median_sam", "mean_sam",
                  f"exceedance@{self.threshold_rad:g}", "mean_rmse"]
        rows = [header]
        for c in self.classes:
            rows.append([c.label, c.count, f"{c.median_sam:.9g}", f"{c.mean_sam:.9g}",
                         f"{c.exceedance:.9g}", f"{c.mean_rmse:.9g}"])
        return rows


def audit_labeling(cube, labels, threshold_rad=0.1, sam_edges=None, rmse_edges=None):
    """Audit every labeled class of a label map against its median spectrum."""
    cube = check_cube(cube)
    warn_reflectance_range(cube)
    labels = check_label_map(labels, cube.shape[:2])
    sam_edges = DEFAULT_SAM_EDGES if sam_edges is None else np.asarray(sam_edges, float)
    rmse_edges = DEFAULT_RMSE_EDGES if rmse_edges is None else np.asarray(rmse_edges, float)

    flat_cube = cube.reshape(-1, cube.shape[2])
    classes = []
    for k in np.unique(labels[labels > 0]):
        flat = np.flatnonzero(labels.ravel() == k)
        median = median_spectrum(cube, flat)
        pix = flat_cube[flat]
        angles = angles_to_reference(pix, median)
        errors = np.sqrt(np.mean((pix - median) ** 2, axis=1))
        classes.append(ClassAudit(
            label=int(k), count=int(flat.size), median_spectrum=median,
            mean_sam=float(angles.mean()), median_sam=float(np.median(angles)),
            mean_rmse=float(errors.mean()),
            exceedance=float(np.mean(angles > threshold_rad)),
            sam_hist=metric_histogram(angles, sam_edges, "SAM"),
            rmse_hist=metric_histogram(errors, rmse_edges, "RMSE"),
        ))
    return AuditReport(classes=classes, sam_map=sam_map(cube, labels),
                       threshold_rad=threshold_rad)


@dataclass
class HistogramGrid:
    """One histogram row per threshold value plus a final reference row."""

    rows: list
    t_values: np.ndarray
    bin_edges: np.ndarray
    metric_name: str = ""

    def __post_init__(self):
        self.t_values = np.asarray(self.t_values, dtype=np.float64)
        self.bin_edges = np.asarray(self.bin_edges, dtype=np.float64)
        if len(self.rows) != self.t_values.size + 1:
            raise ValueError("need one row per threshold plus the reference row")
        for row in self.rows:
            if not np.array_equal(row.bin_edges, self.bin_edges):
                raise ValueError("all rows must share the grid's bin edges")

    def as_matrix(self):
        return np.vstack([row.probabilities for row in self.rows])


def sweep_histograms(cube, masks, acq, t_values, reference_labels, params,
                     sam_edges=None, rmse_edges=None, roi=None):
    """Audit the classifier across threshold values against a reference labeling.

    Runs the classifier once per threshold (descending), computes per-pixel
    SAM/RMSE to own-region medians over each run's labeled pixels, and adds
    the reference labeling as the last row. The classifier's region of
    interest defaults to the reference labeling's labeled pixels. Returns
    (sam_grid, rmse_grid) sharing bin edges.
    """
    t_values = np.asarray(t_values, dtype=np.float64)
    if t_values.size == 0:
        raise ValueError("t_values must be nonempty")
    t_values = np.sort(t_values)[::-1]
    cube = check_cube(cube)
    reference_labels = check_label_map(reference_labels, cube.shape[:2])
    sam_edges = DEFAULT_SAM_EDGES if sam_edges is None else np.asarray(sam_edges, float)
    rmse_edges = DEFAULT_RMSE_EDGES if rmse_edges is None else np.asarray(rmse_edges, float)
    if roi is None:
        roi = reference_labels > 0

    sam_rows, rmse_rows = [], []
    for t in t_values:
        run_params = replace(params, intensity_threshold=float(t))
        try:
            result = classify(acq, masks, run_params, roi=roi)
            sam_vals, rmse_vals = labeling_metric_values(cube, result.label_map)
        except Exception as exc:
            raise RuntimeError(f"sweep failed at threshold {t:g}") from exc
        sam_rows.append(metric_histogram(sam_vals, sam_edges, "SAM"))
        rmse_rows.append(metric_histogram(rmse_vals, rmse_edges, "RMSE"))

    ref_sam, ref_rmse = labeling_metric_values(cube, reference_labels)
    sam_rows.append(metric_histogram(ref_sam, sam_edges, "SAM"))
    rmse_rows.append(metric_histogram(ref_rmse, rmse_edges, "RMSE"))
    return (HistogramGrid(sam_rows, t_values, sam_edges, "SAM"),
            HistogramGrid(rmse_rows, t_values, rmse_edges, "RMSE"))
