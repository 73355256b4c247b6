import numpy as np
import pytest

from codedhsi import (ClassifierParams, SceneSpec, acquire, classify, gen_masks,
                      inject_outliers, sigma_for_snr, synth_scene)


@pytest.fixture()
def small_scene():
    spec = SceneSpec(rows=16, cols=16, bands=8, classes=2, intensity_spread=0.1,
                     rng_seed=3, min_separation_rad=0.3)
    return synth_scene(spec)


@pytest.fixture()
def small_setup(small_scene):
    masks = gen_masks(16, 16, 8, 3, rng_seed=5)
    acq = acquire(small_scene.cube, masks, 0.0)
    return small_scene, masks, acq


def build_acceptance_instance():
    """The synthetic instance of acceptance criteria 5-7 (fixed seeds)."""
    spec = SceneSpec(rows=96, cols=96, bands=32, classes=4, intensity_spread=0.05,
                     rng_seed=5, min_separation_rad=0.35)
    scene = synth_scene(spec)
    cube, altered = inject_outliers(scene.cube, scene.labels, 0.02, rng_seed=6)
    masks = gen_masks(96, 96, 32, 4, rng_seed=7)
    clean = acquire(cube, masks, 0.0)
    sigma = sigma_for_snr(clean.coded, 40.0)
    acq = acquire(cube, masks, sigma, rng_seed=11)
    return {"scene": scene, "cube": cube, "altered": altered, "masks": masks,
            "acq": acq, "sigma": sigma}


@pytest.fixture(scope="session")
def acceptance_instance():
    return build_acceptance_instance()


@pytest.fixture(scope="session")
def acceptance_runs(acceptance_instance):
    """Lazily cached classify runs shared by the acceptance criteria."""
    cache = {}

    def get(threshold):
        if threshold not in cache:
            import time
            t0 = time.perf_counter()
            result = classify(acceptance_instance["acq"], acceptance_instance["masks"],
                              ClassifierParams(intensity_threshold=threshold))
            cache[threshold] = (result, time.perf_counter() - t0)
        return cache[threshold]

    return get


def cluster_matched_accuracy(pred, truth, exclude=None):
    """Fraction of (non-excluded) pixels whose region maps to their true class.

    Each predicted region is matched to its majority true class; unlabeled
    pixels count as errors.
    """
    keep = np.ones(pred.shape, dtype=bool) if exclude is None else ~exclude
    correct = 0
    for k in np.unique(pred[pred > 0]):
        m = (pred == k) & keep
        if m.sum():
            correct += np.unique(truth[m], return_counts=True)[1].max()
    return correct / keep.sum()
