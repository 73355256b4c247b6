"""codedhsi: coded-aperture hyperspectral acquisition, classification, audit.

Simulates coded (mask + spectral shear) acquisitions of hyperspectral
scenes, classifies homogeneous regions directly from a handful of coded
frames (no cube reconstruction), and audits any pixel labeling — ground
truth included — with spectral-angle and RMSE variability statistics.
"""

__version__ = "0.1.0"

from .acquisition import (AcquisitionStack, MaskSet, acquire, gen_masks,
                          predict_pixel, sigma_for_snr, unit_predictions)
from .audit import (AuditReport, ClassAudit, HistogramGrid, audit_labeling,
                    exceedance, labeling_metric_values, sam_map, sweep_histograms)
from .classifier import (ClassificationResult, ClassifierParams, classify,
                       detect_seeds, gaussianity_test, grow_region, merge_regions)
from .estimator import CodedRegionClassifier
from .exceptions import (DegeneratePixelError, DegenerateRegionError,
                         EnviFormatError, InsufficientSampleError,
                         RankDeficientError, UndefinedAngleError)
from .metrics import (MetricHistogram, median_spectrum, metric_histogram,
                      rmse, sam)
from .reconstruct import (RegionModel, estimate_spectrum, intensity_from_pan,
                          refine_intensity, refine_intensity_region,
                          region_objective, residuals, second_difference)
from .scene import SceneSpec, SynthScene, inject_outliers, synth_scene

__all__ = [
    "__version__",
    "AcquisitionStack", "MaskSet", "acquire", "gen_masks", "predict_pixel",
    "sigma_for_snr", "unit_predictions",
    "AuditReport", "ClassAudit", "HistogramGrid", "audit_labeling",
    "exceedance", "labeling_metric_values", "sam_map", "sweep_histograms",
    "ClassificationResult", "ClassifierParams", "classify", "detect_seeds",
    "gaussianity_test", "grow_region", "merge_regions",
    "CodedRegionClassifier",
    "DegeneratePixelError", "DegenerateRegionError", "EnviFormatError",
    "InsufficientSampleError", "RankDeficientError", "UndefinedAngleError",
    "MetricHistogram", "median_spectrum", "metric_histogram", "rmse", "sam",
    "RegionModel", "estimate_spectrum", "intensity_from_pan",
    "refine_intensity", "refine_intensity_region", "region_objective",
    "residuals", "second_difference",
    "SceneSpec", "SynthScene", "inject_outliers", "synth_scene",
]
