"""Acceptance suite: one test per criterion, each at its stated tolerance.

Criteria 5-7 share one fixed synthetic instance (96x96x32 scene, 4 classes,
intensity spread 0.05, 2% injected outliers, 4 coded frames at 40 dB SNR)
built once per session in conftest. Criterion 9 needs a real Pavia-U cube
on disk and is skipped unless the CODEDHSI_PAVIA_* environment variables
point at one.
"""

import os
import time

import numpy as np
import pytest

from codedhsi import (ClassifierParams, MaskSet, acquire, classify, exceedance,
                      estimate_spectrum, gaussianity_test, gen_masks,
                      labeling_metric_values, rmse, sam, sweep_histograms)
from codedhsi.cli import main
from conftest import cluster_matched_accuracy


def report(criterion, detail):
    print(f"ACCEPTANCE {criterion}: PASS ({detail})")


def test_criterion_01_forward_model_identity():
    cube = np.random.default_rng(0).random((64, 64, 32))
    masks = MaskSet.all_open(64, 64, 32, 3)
    t0 = time.perf_counter()
    acq = acquire(cube, masks, 0.0)
    elapsed = time.perf_counter() - t0
    for a in range(3):
        assert np.array_equal(acq.coded[:, :, a], acq.pan)  # tolerance 0
    assert elapsed < 1.0
    report(1, f"exact equality on 64x64x32, {elapsed:.3f}s")


def test_criterion_02_adjoint_identity():
    rows, cols, bands, count = 32, 32, 16, 4
    masks = gen_masks(rows, cols, bands, count, rng_seed=1)
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(20):
        x = rng.standard_normal((rows, cols, bands))
        y = rng.standard_normal((rows, cols, count))
        lx = acquire(x, masks, 0.0).coded
        lty = np.zeros((rows, cols, bands))
        for r in range(rows):
            for c in range(cols):
                lty[r, c, :] = masks.masks[:, r, c:c + bands].T @ y[r, c, :]
        lhs = float(np.sum(lx * y))
        rhs = float(np.sum(x * lty))
        rel = abs(lhs - rhs) / abs(lhs)
        worst = max(worst, rel)
        assert rel <= 1e-10
    report(2, f"20 pairs, worst relative defect {worst:.2e}")


def test_criterion_03_reconstruction_oracle():
    from codedhsi import SceneSpec, synth_scene
    scene = synth_scene(SceneSpec(rows=4, cols=4, bands=12, classes=1,
                                  intensity_spread=0.1, rng_seed=2))
    masks = gen_masks(4, 4, 12, 3, rng_seed=3)  # 48 equations > 12 unknowns
    acq = acquire(scene.cube, masks, 0.0)
    region = np.arange(16)
    truth = scene.spectra[0]
    got = estimate_spectrum(acq, masks, region,
                            scene.intensity.ravel()[region], reg_weight=1e-8)
    rel = np.linalg.norm(got - truth) / np.linalg.norm(truth)
    assert rel < 1e-6
    report(3, f"relative spectrum error {rel:.2e}")


def test_criterion_04_gaussianity_calibration():
    rng = np.random.default_rng(4)
    gauss_rejects = sum(
        not gaussianity_test(rng.standard_normal(1000), 0.05)[0]
        for _ in range(1000))
    rate = gauss_rejects / 1000
    assert abs(rate - 0.05) <= 0.02
    uniform_rejects = sum(
        not gaussianity_test(rng.uniform(-1, 1, 1000), 0.05)[0]
        for _ in range(1000))
    assert uniform_rejects / 1000 > 0.99
    report(4, f"gaussian rejection rate {rate:.3f}, "
              f"uniform rejection rate {uniform_rejects / 1000:.3f}")


def test_criterion_05_classifier_recovery(acceptance_instance, acceptance_runs):
    inst = acceptance_instance
    result, elapsed = acceptance_runs(0.2)
    pred = result.label_map
    outliers = np.zeros(pred.size, dtype=bool)
    outliers[inst["altered"]] = True
    outliers = outliers.reshape(pred.shape)
    accuracy = cluster_matched_accuracy(pred, inst["scene"].labels, exclude=outliers)
    unclassified_outliers = float(np.mean(pred.reshape(-1)[inst["altered"]] == 0))
    assert accuracy >= 0.95
    assert unclassified_outliers >= 0.90
    assert elapsed < 60.0
    report(5, f"accuracy {accuracy:.4f}, outliers unclassified "
              f"{unclassified_outliers:.3f}, runtime {elapsed:.1f}s")


def test_criterion_06_threshold_monotonicity(acceptance_runs):
    loose, _ = acceptance_runs(0.2)
    tight, _ = acceptance_runs(0.05)
    assert tight.n_regions >= loose.n_regions
    report(6, f"{tight.n_regions} regions at 0.05 >= {loose.n_regions} at 0.2")


def test_criterion_07_audit_improvement(acceptance_instance, acceptance_runs):
    inst = acceptance_instance
    scene = inst["scene"]
    # reference labeling that deliberately merges the two most separated classes
    best_pair, best_angle = None, 0.0
    for i in range(4):
        for j in range(i + 1, 4):
            angle = sam(scene.spectra[i], scene.spectra[j])
            if angle > best_angle:
                best_pair, best_angle = (i + 1, j + 1), angle
    assert best_angle >= 0.3
    merged = scene.labels.copy()
    merged[merged == best_pair[1]] = best_pair[0]

    result, _ = acceptance_runs(0.2)
    clf_sam, _ = labeling_metric_values(inst["cube"], result.label_map)
    ref_sam, _ = labeling_metric_values(inst["cube"], merged)
    assert clf_sam.mean() < ref_sam.mean()

    # 50 bins over [0, 0.5]: the first decile is exactly the first 5 bins
    edges = np.linspace(0.0, 0.5, 51)
    params = ClassifierParams(intensity_threshold=0.2)
    sam_grid, _ = sweep_histograms(
        inst["cube"], inst["masks"], inst["acq"], [0.2], merged, params,
        sam_edges=edges, rmse_edges=edges,
        roi=np.ones(merged.shape, dtype=bool))
    clf_row, ref_row = sam_grid.rows
    clf_decile = float(clf_row.probabilities[:5].sum())
    ref_decile = float(ref_row.probabilities[:5].sum())
    assert clf_decile > ref_decile
    report(7, f"merged pair angle {best_angle:.2f} rad; mean SAM "
              f"{clf_sam.mean():.4f} < {ref_sam.mean():.4f}; first-decile mass "
              f"{clf_decile:.3f} > {ref_decile:.3f}")


def test_criterion_08_metric_unit_values():
    assert sam(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == pytest.approx(
        np.pi / 2, abs=1e-12)
    s = np.array([0.25, 0.5, 0.125])
    assert sam(s, 2 * s) == pytest.approx(0.0, abs=1e-12)
    assert rmse(np.zeros(7), np.ones(7)) == 1.0
    report(8, "sam/rmse unit values exact")


@pytest.mark.skipif(
    "CODEDHSI_PAVIA_CUBE_HDR" not in os.environ,
    reason="optional: needs a real Pavia-U cube (set CODEDHSI_PAVIA_CUBE_HDR, "
           "CODEDHSI_PAVIA_CUBE_DAT, CODEDHSI_PAVIA_GT)")
def test_criterion_09_pavia_exceedance():
    from codedhsi.io import read_envi_file, read_label_map
    cube = read_envi_file(os.environ["CODEDHSI_PAVIA_CUBE_HDR"],
                          os.environ["CODEDHSI_PAVIA_CUBE_DAT"])
    gt = read_label_map(os.environ["CODEDHSI_PAVIA_GT"])
    meadows = int(os.environ.get("CODEDHSI_PAVIA_MEADOWS", "2"))
    bitumen = int(os.environ.get("CODEDHSI_PAVIA_BITUMEN", "7"))
    frac_meadows = exceedance(cube, gt == meadows, 0.1)
    frac_bitumen = exceedance(cube, gt == bitumen, 0.1)
    assert abs(frac_meadows - 0.598) <= 0.005
    assert abs(frac_bitumen - 0.023) <= 0.005
    # region counts are logged only: mask realizations and estimator internals
    # differ from the original setup, so counts are not gated
    masks = gen_masks(cube.shape[0], cube.shape[1], cube.shape[2], 10, rng_seed=0)
    acq = acquire(cube, masks, 0.0)
    for name, cid in (("meadows", meadows), ("bitumen", bitumen)):
        for t in (0.2, 0.05):
            res = classify(acq, masks, ClassifierParams(intensity_threshold=t),
                           roi=gt == cid)
            print(f"pavia {name} threshold {t}: {res.n_regions} regions (log only)")
    report(9, f"meadows exceedance {frac_meadows:.3f}, bitumen {frac_bitumen:.3f}")


def test_criterion_10_pipeline_determinism(tmp_path):
    config = (
        "scene.rows = 16\nscene.cols = 16\nscene.bands = 8\nscene.classes = 2\n"
        "scene.intensity_spread = 0.05\nscene.min_separation = 0.3\nscene.seed = 3\n"
        "sim.acquisitions = 3\nsim.noise_sigma = 0.001\nsim.seed = 5\n"
        "classifier.block_size = 4\nclassifier.threshold = 0.2, 0.05\n")
    cfg = tmp_path / "run.cfg"
    cfg.write_text(config)
    out = str(tmp_path / "out")

    def run_all():
        for cmd in ("gen-scene", "gen-masks", "simulate", "sweep"):
            assert main([cmd, "--config", str(cfg), "--out", out]) == 0
        # classify needs a single threshold; audit then reads its labeling
        single = tmp_path / "single.cfg"
        single.write_text(config.replace("0.2, 0.05", "0.2"))
        for cmd in ("classify", "audit"):
            assert main([cmd, "--config", str(single), "--out", out]) == 0

    def snapshot():
        snap = {}
        for root, _, files in os.walk(out):
            for f in files:
                path = os.path.join(root, f)
                data = open(path, "rb").read()
                if f.startswith("manifest_"):
                    data = b"\n".join(ln for ln in data.split(b"\n")
                                      if not ln.startswith(b"timestamp"))
                snap[os.path.relpath(path, out)] = data
        return snap

    run_all()
    first = snapshot()
    run_all()
    second = snapshot()
    assert first.keys() == second.keys()
    diffs = [n for n in first if first[n] != second[n]]
    assert diffs == []
    report(10, f"{len(first)} artifacts byte-identical across reruns")
