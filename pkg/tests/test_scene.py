import numpy as np
import pytest

from codedhsi import SceneSpec, inject_outliers, median_spectrum, sam, synth_scene


def test_delta_zero_single_class_identical_spectra():
    scene = synth_scene(SceneSpec(rows=6, cols=6, bands=10, classes=1,
                                  intensity_spread=0.0, rng_seed=0))
    flat = scene.cube.reshape(-1, 10)
    assert np.allclose(flat, flat[0], atol=0)


def test_pixels_are_scalar_multiples_of_reference():
    scene = synth_scene(SceneSpec(rows=8, cols=8, bands=12, classes=2,
                                  intensity_spread=0.1, rng_seed=1))
    for r in range(8):
        for c in range(8):
            ref = scene.spectra[scene.labels[r, c] - 1]
            scale = scene.intensity[r, c]
            assert 0.9 <= scale <= 1.1
            assert np.array_equal(scene.cube[r, c, :], scale * ref)


def test_per_class_sam_is_zero():
    scene = synth_scene(SceneSpec(rows=6, cols=6, bands=16, classes=3,
                                  intensity_spread=0.2, rng_seed=2))
    for r in range(6):
        for c in range(6):
            ref = scene.spectra[scene.labels[r, c] - 1]
            assert sam(scene.cube[r, c, :], ref) < 1e-6


def test_determinism():
    spec = SceneSpec(rows=8, cols=8, bands=8, classes=2, rng_seed=9)
    a, b = synth_scene(spec), synth_scene(spec)
    assert np.array_equal(a.cube, b.cube)
    assert np.array_equal(a.labels, b.labels)
    assert np.array_equal(a.intensity, b.intensity)


def test_spectra_separation_and_range():
    spec = SceneSpec(rows=4, cols=4, bands=24, classes=4, rng_seed=3,
                     min_separation_rad=0.3, intensity_spread=0.1)
    scene = synth_scene(spec)
    for i in range(4):
        for j in range(i + 1, 4):
            assert sam(scene.spectra[i], scene.spectra[j]) > 0.3
    assert scene.cube.min() >= 0.0
    assert scene.cube.max() <= 1.0


def test_tile_geometry_partitions_all_classes():
    scene = synth_scene(SceneSpec(rows=9, cols=12, bands=6, classes=6, rng_seed=4))
    assert sorted(np.unique(scene.labels)) == [1, 2, 3, 4, 5, 6]


def test_voronoi_geometry():
    scene = synth_scene(SceneSpec(rows=20, cols=20, bands=6, classes=3,
                                  geometry="voronoi", voronoi_seeds=9, rng_seed=5))
    assert sorted(np.unique(scene.labels)) == [1, 2, 3]


def test_spec_validation():
    with pytest.raises(ValueError):
        SceneSpec(rows=2, cols=2, bands=4, classes=5)  # more classes than pixels
    with pytest.raises(ValueError):
        SceneSpec(rows=4, cols=4, bands=4, classes=2, intensity_spread=1.0)
    with pytest.raises(ValueError):
        SceneSpec(rows=4, cols=4, bands=4, classes=2, geometry="hex")
    with pytest.raises(ValueError):
        SceneSpec(rows=4, cols=4, bands=4, classes=3, geometry="voronoi",
                  voronoi_seeds=2)


class TestInjectOutliers:
    def test_rate_zero_is_identity(self, small_scene):
        out, altered = inject_outliers(small_scene.cube, small_scene.labels, 0.0)
        assert altered.size == 0
        assert np.array_equal(out, small_scene.cube)

    def test_exact_count(self):
        scene = synth_scene(SceneSpec(rows=20, cols=20, bands=8, classes=1,
                                      rng_seed=6))
        out, altered = inject_outliers(scene.cube, scene.labels, 0.05, rng_seed=7)
        assert altered.size == 20  # floor(0.05 * 400)
        changed = np.flatnonzero(
            np.any(out.reshape(-1, 8) != scene.cube.reshape(-1, 8), axis=1))
        assert np.array_equal(np.sort(changed), altered)

    def test_altered_pixels_are_aberrant(self, small_scene):
        out, altered = inject_outliers(small_scene.cube, small_scene.labels, 0.05,
                                       rng_seed=8)
        assert altered.size > 0
        for flat in altered:
            k = small_scene.labels.ravel()[flat]
            median = median_spectrum(small_scene.cube, small_scene.labels == k)
            r, c = divmod(int(flat), small_scene.labels.shape[1])
            assert sam(out[r, c, :], median) > 0.1

    def test_determinism(self, small_scene):
        a = inject_outliers(small_scene.cube, small_scene.labels, 0.1, rng_seed=9)
        b = inject_outliers(small_scene.cube, small_scene.labels, 0.1, rng_seed=9)
        assert np.array_equal(a[0], b[0])
        assert np.array_equal(a[1], b[1])

    def test_rate_bounds(self, small_scene):
        with pytest.raises(ValueError):
            inject_outliers(small_scene.cube, small_scene.labels, 1.0)
