"""Unsupervised region classification directly from coded acquisitions.

Three stages operate on the coded frames plus the panchromatic image, with
no cube reconstruction:

1. seed detection on non-overlapping square blocks: a block becomes a seed
   region when a single reference spectrum and per-pixel intensities near 1
   explain its coded data with Gaussian residuals;
2. region growth along a FIFO frontier of 4-connected neighbors, each
   candidate gated on its intensity deviation and residual norm, with the
   whole-region fit refreshed periodically;
3. merging of adjacent regions whose spectra are close in spectral angle,
   accepted only when the joint refit still passes every gate.

Pixels never accepted stay unclassified (label 0); pixels outside the
region of interest carry label -1.
"""

import heapq
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2

from .exceptions import (DegeneratePixelError, DegenerateRegionError,
                         InsufficientSampleError, RankDeficientError,
                         UndefinedAngleError)
from .metrics import sam
from .reconstruct import (RegionModel, estimate_spectrum, intensity_from_pan,
                          noise_variance, refine_intensity_region,
                          studentized_residuals)
from .validation import check_label_map

# chi-square(2) quantiles at 1 - alpha for the common significance levels;
# other alphas use the df=2 closed form -2*ln(alpha), which is exact.
_JB_THRESHOLDS = {0.10: 4.605170185988091, 0.05: 5.991464547107979,
                  0.01: 9.210340371976182}

# residuals whose rms is below this fraction of the region's data scale are
# solver round-off, not evidence about the noise distribution
_NUMERICAL_ZERO = 1e-8

# on a stack recorded as exactly noise-free, residuals this far below the
# data scale are pure regularization bias: there is no noise to test
_BIAS_LEVEL = 1e-2


def gaussianity_test(residuals, alpha=0.05):
    """Jarque-Bera normality test on pooled residuals.

    Computes sample skewness S and kurtosis K and the statistic
    N/6 * (S^2 + (K-3)^2/4); passes when it stays below the chi-square(2)
    quantile at 1 - alpha. A constant sample (zero variance) carries no
    evidence against normality: statistic 0, pass.

    Returns (pass, statistic). Raises InsufficientSampleError for N < 20.
    """
    x = np.asarray(residuals, dtype=np.float64).ravel()
    n = x.size
    if n < 20:
        raise InsufficientSampleError(f"normality test needs >= 20 samples, got {n}")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly in (0, 1)")
    threshold = _JB_THRESHOLDS.get(alpha, -2.0 * math.log(alpha))
    mean = x.mean()
    xc = x - mean
    m2 = np.mean(xc ** 2)
    if m2 <= (16 * np.finfo(float).eps * (1.0 + abs(mean))) ** 2:
        return True, 0.0  # constant sample up to round-off: nothing to test
    skew = np.mean(xc ** 3) / m2 ** 1.5
    kurt = np.mean(xc ** 4) / m2 ** 2
    stat = float(n / 6.0 * (skew ** 2 + (kurt - 3.0) ** 2 / 4.0))
    return stat <= threshold, stat


@dataclass
class ClassifierParams:
    """Tuning knobs of the three-stage classifier.

    block_size is the seed block side; its square must exceed
    bands/acquisitions so a block determines a spectrum. The intensity
    threshold bounds |1 - intensity| for every accepted pixel. reg_weight
    None selects the scale-relative default of the spectrum estimator.
    """

    block_size: int = 4
    intensity_threshold: float = 0.2
    alpha: float = 0.05
    reg_weight: float | None = None
    refresh_every: int = 64
    merge_angle: float = 0.10

    def validate(self, bands, acquisitions):
        if self.block_size < 1:
            raise ValueError("block_size must be positive")
        ratio = bands / acquisitions
        if self.block_size ** 2 <= ratio:
            raise ValueError(
                "seed blocks cannot determine a spectrum: block_size^2 must exceed "
                f"bands/acquisitions ({self.block_size ** 2} <= {ratio:.6g})")
        if self.intensity_threshold <= 0:
            raise ValueError("intensity_threshold must be positive")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie strictly in (0, 1)")
        if self.reg_weight is not None and self.reg_weight < 0:
            raise ValueError("reg_weight must be nonnegative")
        if self.refresh_every < 1:
            raise ValueError("refresh_every must be positive")
        if self.merge_angle < 0:
            raise ValueError("merge_angle must be nonnegative")


@dataclass
class ClassificationResult:
    """Final label map plus one fitted model per region.

    models[k - 1] is the model of region id k; region ids are contiguous
    1..K. Unclassified pixels keep 0, outside-of-interest pixels -1.
    """

    label_map: np.ndarray
    models: list
    params: ClassifierParams = field(repr=False, default=None)

    @property
    def n_regions(self):
        return len(self.models)

    def summary(self):
        """Per-region diagnostics rows (id, size, residual stats, clamped mass)."""
        rows = []
        for k, m in enumerate(self.models, start=1):
            rows.append({
                "region": k,
                "size": int(m.size),
                "residual_rms": float(m.residual_rms),
                "gaussianity_stat": float(m.gaussianity_stat),
                "clamped_mass": float(m.clamped_mass),
                "reg_weight": float(m.reg_weight),
            })
        return rows


def _fit_region(acq, masks, region, params, intensities):
    """One fit pass: spectrum from given intensities, then refit intensities.

    Fills residual statistics and the gaussianity verdict. The test runs on
    studentized residuals (the intensity fit leaves raw entries with unequal
    variances, which reads as spurious kurtosis on large regions); residual
    vectors at solver round-off level pass trivially.
    """
    spectrum, info = estimate_spectrum(
        acq, masks, region, intensities, params.reg_weight, full_output=True)
    refined = refine_intensity_region(acq, masks, spectrum, region)
    student, rms = studentized_residuals(acq, masks, region, spectrum, refined)

    rows_idx, cols_idx = np.unravel_index(region, (acq.rows, acq.cols))
    data_scale = float(np.sqrt(np.mean(acq.coded[rows_idx, cols_idx, :] ** 2)))
    tol = _BIAS_LEVEL if acq.noise_sigma == 0.0 else _NUMERICAL_ZERO
    if rms <= tol * (1.0 + data_scale):
        passed, stat = True, 0.0
    else:
        passed, stat = gaussianity_test(student, params.alpha)

    return RegionModel(
        region=region, spectrum=spectrum, intensities=refined,
        residual_rms=rms, noise_var=noise_variance(rms, region.size, acq.count),
        gaussianity_stat=stat, gaussianity_pass=passed,
        clamped_mass=info["clamped_mass"], reg_weight=info["reg_weight"])


def _within_threshold(model, params):
    return float(np.max(np.abs(1.0 - model.intensities))) < params.intensity_threshold


def detect_seeds(acq, masks, params, label_map=None):
    """Stage 1: scan non-overlapping blocks for homogeneous seed regions.

    Blocks are visited in row-major order; a block is accepted when all its
    pixels are unlabeled (0), the fitted model passes the gaussianity test
    and every pixel's intensity stays within the threshold. Accepted blocks
    are written into label_map with fresh ids in scan order. Returns the
    list of seed models (possibly empty).
    """
    params.validate(masks.bands, acq.count)
    if label_map is None:
        label_map = np.zeros((acq.rows, acq.cols), dtype=np.int32)
    else:
        label_map = check_label_map(label_map, (acq.rows, acq.cols))
    side = params.block_size
    if side > min(acq.rows, acq.cols):
        raise ValueError(f"block_size {side} exceeds scene dimensions "
                         f"{acq.rows}x{acq.cols}")

    labels_flat = label_map.ravel()
    base = np.arange(side) * acq.cols
    block_template = (base[:, None] + np.arange(side)).ravel()
    next_id = int(labels_flat.max(initial=0)) + 1
    models = []
    for r0 in range(0, acq.rows - side + 1, side):
        for c0 in range(0, acq.cols - side + 1, side):
            block = block_template + (r0 * acq.cols + c0)
            if np.any(labels_flat[block] != 0):
                continue
            try:
                intensities = intensity_from_pan(acq.pan, block)
                model = _fit_region(acq, masks, block, params, intensities)
            except (DegenerateRegionError, DegeneratePixelError, RankDeficientError):
                continue
            if not model.gaussianity_pass or not _within_threshold(model, params):
                continue
            labels_flat[block] = next_id
            next_id += 1
            models.append(model)
    return models


def _refreshed(acq, masks, model, batch, params):
    """Whole-region refit after a batch of acceptances.

    Re-enters the spectrum estimator with the current intensities (the
    refined ones plus the batch's per-pixel fits), refits intensities and
    re-checks both region-level gates. Returns the new model or None.
    """
    batch_flat = np.array([f for f, _ in batch], dtype=np.int64)
    region = np.concatenate([model.region, batch_flat])
    current = np.concatenate([model.intensities, [p for _, p in batch]])
    order = np.argsort(region, kind="stable")
    region, current = region[order], current[order]
    try:
        refit = _fit_region(acq, masks, region, params, current)
    except (DegeneratePixelError, RankDeficientError):
        return None
    if not refit.gaussianity_pass or not _within_threshold(refit, params):
        return None
    return refit


def grow_region(acq, masks, model, label_map, params):
    """Stage 2: grow one seed region along a FIFO frontier.

    Candidates are the 4-connected unlabeled neighbors, seeded from the
    region pixels in row-major order. A candidate is accepted when its
    per-pixel intensity fit stays within the threshold and its residual
    norm passes a chi-square gate against the region's noise variance.
    After every refresh_every acceptances (and once more when the frontier
    empties) the whole region is refit and re-checked; a failed recheck
    rolls back the last batch and stops growth. Each successful refresh
    re-opens the region boundary, so pixels rejected under an earlier,
    cruder model are re-tested under the refreshed one; growth terminates
    when a full boundary pass accepts nothing.

    Returns (model, label_map); label_map is updated in place.
    """
    label_map = check_label_map(label_map, (acq.rows, acq.cols))
    labels_flat = label_map.ravel()
    rid = int(labels_flat[model.region[0]])
    if rid < 1 or not np.all(labels_flat[model.region] == rid):
        raise ValueError("the model's region must already be labeled in label_map")

    rows, cols = acq.rows, acq.cols
    win = masks.windows()
    gate = float(chi2.ppf(1.0 - params.alpha, acq.count))
    # on a known-noise-free stack the only residual is regularization bias,
    # so the statistical gate gets a relative floor instead of round-off slack
    slack_tol = _BIAS_LEVEL if acq.noise_sigma == 0.0 else _NUMERICAL_ZERO
    spectrum = model.spectrum
    sigma2 = model.noise_var

    frontier = deque()
    queued = np.zeros(rows * cols, dtype=bool)

    def push_neighbors(flat):
        r, c = divmod(flat, cols)
        for nf in (flat - cols, flat - 1, flat + 1, flat + cols):
            if nf == flat - 1 and c == 0:
                continue
            if nf == flat + 1 and c == cols - 1:
                continue
            if 0 <= nf < rows * cols and labels_flat[nf] == 0 and not queued[nf]:
                queued[nf] = True
                frontier.append(nf)

    def seed_boundary(region):
        for flat in region:
            push_neighbors(int(flat))

    seed_boundary(model.region)
    batch = []

    def rollback():
        for f, _ in batch:
            labels_flat[f] = 0

    while True:
        while frontier:
            nf = frontier.popleft()
            queued[nf] = False
            if labels_flat[nf] != 0:
                continue
            r, c = divmod(nf, cols)
            d0 = win[:, r, c, :] @ spectrum
            denom = float(d0 @ d0)
            if denom == 0.0:
                continue  # mask blocks every band here; cannot be evaluated
            dn = acq.coded[r, c, :]
            intensity = float(d0 @ dn) / denom
            if abs(1.0 - intensity) >= params.intensity_threshold:
                continue
            resid = dn - intensity * d0
            slack = (slack_tol * (1.0 + float(np.linalg.norm(dn)))) ** 2
            if float(resid @ resid) > sigma2 * gate + slack:
                continue

            labels_flat[nf] = rid
            batch.append((nf, intensity))
            push_neighbors(nf)

            if len(batch) >= params.refresh_every:
                refit = _refreshed(acq, masks, model, batch, params)
                if refit is None:
                    rollback()
                    return model, label_map
                model, spectrum, sigma2 = refit, refit.spectrum, refit.noise_var
                batch = []
                seed_boundary(model.region)

        if not batch:
            break  # no acceptance since the last refresh: stable under this model
        refit = _refreshed(acq, masks, model, batch, params)
        if refit is None:
            rollback()
            break
        model, spectrum, sigma2 = refit, refit.spectrum, refit.noise_var
        batch = []
        seed_boundary(model.region)
        if not frontier:
            break
    return model, label_map


def _adjacency(label_map):
    """Pairs of distinct positive labels touching 4-connectedly."""
    pairs = set()
    for a, b in ((label_map[:, :-1], label_map[:, 1:]),
                 (label_map[:-1, :], label_map[1:, :])):
        touching = (a != b) & (a > 0) & (b > 0)
        if np.any(touching):
            lo = np.minimum(a[touching], b[touching])
            hi = np.maximum(a[touching], b[touching])
            pairs.update(zip(lo.tolist(), hi.tolist()))
    return pairs


def merge_regions(acq, masks, models, label_map, params):
    """Stage 3: merge adjacent regions whose spectra agree, to fixpoint.

    Adjacent pairs are tried in ascending spectral-angle order; only pairs
    below merge_angle are candidates at all. A pair merges when the joint
    refit of the union passes the gaussianity test and keeps every pixel
    within the intensity threshold. Merging re-inserts the survivor's pairs
    with its new spectrum. Region ids are relabeled contiguously at the end.
    """
    if not models:
        raise ValueError("models must be nonempty")
    label_map = check_label_map(label_map, (acq.rows, acq.cols))
    labels_flat = label_map.ravel()

    id2model = {}
    for m in models:
        id2model[int(labels_flat[m.region[0]])] = m
    alive = set(id2model)
    nbrs = {i: set() for i in alive}
    for i, j in _adjacency(label_map):
        if i in alive and j in alive:
            nbrs[i].add(j)
            nbrs[j].add(i)

    version = dict.fromkeys(alive, 0)
    heap = []

    def push_pair(i, j):
        a, b = (i, j) if i < j else (j, i)
        try:
            angle = sam(id2model[a].spectrum, id2model[b].spectrum)
        except UndefinedAngleError:
            return
        if angle < params.merge_angle:
            heapq.heappush(heap, (angle, a, b, version[a], version[b]))

    for i in sorted(alive):
        for j in sorted(nbrs[i]):
            if j > i:
                push_pair(i, j)

    while heap:
        angle, i, j, vi, vj = heapq.heappop(heap)
        if i not in alive or j not in alive:
            continue
        if version[i] != vi or version[j] != vj:
            continue
        union = np.sort(np.concatenate([id2model[i].region, id2model[j].region]))
        try:
            intensities = intensity_from_pan(acq.pan, union)
            joint = _fit_region(acq, masks, union, params, intensities)
        except (DegenerateRegionError, DegeneratePixelError, RankDeficientError):
            continue
        if not joint.gaussianity_pass or not _within_threshold(joint, params):
            continue

        labels_flat[labels_flat == j] = i
        id2model[i] = joint
        del id2model[j]
        alive.remove(j)
        nbrs[i] = (nbrs[i] | nbrs[j]) - {i, j}
        for k in nbrs.pop(j):
            nbrs[k].discard(j)
            if k != i:
                nbrs[k].add(i)
        version[i] += 1
        for k in sorted(nbrs[i]):
            push_pair(i, k)

    survivors = sorted(alive)
    lut = np.zeros(max(survivors) + 1, dtype=label_map.dtype)
    for new, old in enumerate(survivors, start=1):
        lut[old] = new
    relabeled = np.where(label_map > 0, lut[np.maximum(label_map, 0)], label_map)
    return ClassificationResult(label_map=relabeled,
                                models=[id2model[old] for old in survivors],
                                params=params)


def classify(acq, masks, params=None, roi=None):
    """Run the full pipeline: seeds, growth in id order, then merging.

    roi, when given, is a boolean mask of pixels to analyze; everything
    outside it is labeled -1 and never touched. Deterministic for fixed
    inputs.
    """
    if params is None:
        params = ClassifierParams()
    params.validate(masks.bands, acq.count)
    label_map = np.zeros((acq.rows, acq.cols), dtype=np.int32)
    if roi is not None:
        roi = np.asarray(roi, dtype=bool)
        if roi.shape != (acq.rows, acq.cols):
            raise ValueError(f"roi shape {roi.shape} != scene {(acq.rows, acq.cols)}")
        label_map[~roi] = -1

    seeds = detect_seeds(acq, masks, params, label_map)
    grown = []
    for model in seeds:
        model, label_map = grow_region(acq, masks, model, label_map, params)
        grown.append(model)
    if not grown:
        return ClassificationResult(label_map=label_map, models=[], params=params)
    return merge_regions(acq, masks, grown, label_map, params)
