import numpy as np
import pytest
from sklearn.base import clone

from codedhsi import CodedRegionClassifier, SceneSpec, acquire, gen_masks, synth_scene


@pytest.fixture()
def fitted_inputs():
    scene = synth_scene(SceneSpec(rows=16, cols=16, bands=8, classes=2,
                                  intensity_spread=0.05, rng_seed=3,
                                  min_separation_rad=0.3))
    masks = gen_masks(16, 16, 8, 3, rng_seed=5)
    acq = acquire(scene.cube, masks, 0.0)
    return scene, masks, acq


def test_get_set_params_roundtrip(fitted_inputs):
    _, masks, _ = fitted_inputs
    clf = CodedRegionClassifier(masks=masks, intensity_threshold=0.07)
    params = clf.get_params()
    assert params["intensity_threshold"] == 0.07
    assert params["block_size"] == 4
    clf.set_params(intensity_threshold=0.2, merge_angle=0.02)
    assert clf.intensity_threshold == 0.2
    assert clf.merge_angle == 0.02


def test_clone_preserves_params(fitted_inputs):
    _, masks, _ = fitted_inputs
    clf = CodedRegionClassifier(masks=masks, alpha=0.01)
    cloned = clone(clf)
    assert cloned.alpha == 0.01
    assert np.array_equal(cloned.masks.masks, masks.masks)


def test_fit_sets_attributes(fitted_inputs):
    scene, masks, acq = fitted_inputs
    clf = CodedRegionClassifier(masks=masks, intensity_threshold=0.2)
    assert clf.fit(acq) is clf
    assert clf.labels_.shape == (16, 16)
    assert clf.n_regions_ == len(clf.region_models_)
    assert clf.n_regions_ >= 1
    assert np.all(clf.labels_ >= 0)


def test_fit_predict_returns_label_map(fitted_inputs):
    _, masks, acq = fitted_inputs
    clf = CodedRegionClassifier(masks=masks, intensity_threshold=0.2)
    labels = clf.fit_predict(acq)
    assert np.array_equal(labels, clf.labels_)


def test_tuple_input_accepted(fitted_inputs):
    _, masks, acq = fitted_inputs
    clf = CodedRegionClassifier(masks=masks, intensity_threshold=0.2)
    clf.fit((acq.coded, acq.pan))
    assert clf.n_regions_ >= 1


def test_missing_masks_rejected(fitted_inputs):
    _, _, acq = fitted_inputs
    with pytest.raises(ValueError, match="masks"):
        CodedRegionClassifier().fit(acq)


def test_roi_parameter(fitted_inputs):
    _, masks, acq = fitted_inputs
    roi = np.zeros((16, 16), dtype=bool)
    roi[8:, :] = True
    clf = CodedRegionClassifier(masks=masks, roi=roi)
    clf.fit(acq)
    assert np.all(clf.labels_[:8, :] == -1)
