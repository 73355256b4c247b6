"""scikit-learn style front end for the coded-data region classifier."""

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from .acquisition import AcquisitionStack, MaskSet
from .classifier import ClassifierParams, classify


class CodedRegionClassifier(ClusterMixin, BaseEstimator):
    """Unsupervised region classifier operating on coded acquisitions.

    The measurement operator (the mask set) is a constructor parameter so
    the estimator composes with sklearn tooling: ``fit`` takes the
    AcquisitionStack as X and exposes the resulting label map as
    ``labels_`` (0 = unclassified, -1 = outside the region of interest,
    k >= 1 = region id).

    Example
    -------
    >>> masks = gen_masks(32, 32, 16, 4, rng_seed=0)
    >>> acq = acquire(cube, masks, noise_sigma=0.0)
    >>> clf = CodedRegionClassifier(masks=masks, intensity_threshold=0.2)
    >>> labels = clf.fit_predict(acq)
    """

    def __init__(self, masks=None, block_size=4, intensity_threshold=0.2,
                 alpha=0.05, reg_weight=None, refresh_every=64,
                 merge_angle=0.10, roi=None):
        self.masks = masks
        self.block_size = block_size
        self.intensity_threshold = intensity_threshold
        self.alpha = alpha
        self.reg_weight = reg_weight
        self.refresh_every = refresh_every
        self.merge_angle = merge_angle
        self.roi = roi

    def _validate_input(self, X):
        if not isinstance(self.masks, MaskSet):
            raise ValueError("masks must be set to a MaskSet before fitting")
        if isinstance(X, AcquisitionStack):
            return X
        if isinstance(X, tuple) and len(X) == 2:
            coded, pan = X
            return AcquisitionStack(coded=np.asarray(coded), pan=np.asarray(pan))
        raise ValueError("X must be an AcquisitionStack or a (coded, pan) tuple")

    def fit(self, X, y=None):
        """Classify the coded stack X; y is ignored (unsupervised)."""
        acq = self._validate_input(X)
        params = ClassifierParams(
            block_size=self.block_size,
            intensity_threshold=self.intensity_threshold,
            alpha=self.alpha,
            reg_weight=self.reg_weight,
            refresh_every=self.refresh_every,
            merge_angle=self.merge_angle,
        )
        result = classify(acq, self.masks, params, roi=self.roi)
        self.result_ = result
        self.labels_ = result.label_map
        self.region_models_ = result.models
        self.n_regions_ = result.n_regions
        return self
