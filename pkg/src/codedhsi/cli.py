"""Command-line pipeline: scene generation, simulation, classification, audit.

Every command resolves a RunConfig (defaults <- config file <- flags, with
CODEDHSI_OUT overriding the output directory), writes its declared output
files plus a manifest echoing the resolved config, and is deterministic for
fixed seeds. Failures print one machine-readable line ``ERROR <kind>:
<message>`` to stderr and exit with the kind's code (see EXIT_CODES).
"""

import argparse
import datetime
import os
import sys

import numpy as np

from . import __version__
from .acquisition import AcquisitionStack, acquire, gen_masks
from .audit import audit_labeling, sweep_histograms
from .classifier import ClassifierParams, classify
from .config import ConfigError, ConfigSyntaxError, MissingInputError, RunConfig
from .exceptions import EnviFormatError
from .io import (read_envi_file, read_label_map, read_masks, render_histogram_grid,
                 render_label_map, render_sam_map, write_envi_file, write_label_map,
                 write_masks, write_rows_csv, write_spectra_csv)
from .scene import SceneSpec, inject_outliers, synth_scene

EXIT_CODES = {"ok": 0, "internal": 1, "config": 2, "missing-file": 3, "parse": 4}

_HELP_EPILOG = """\
exit codes:
  0  success
  1  internal error
  2  config violation (bad parameter, constraint such as
     block_size^2 > bands/acquisitions, conflicting scene sources)
  3  missing input file
  4  parse failure (config syntax, ENVI/CSV payloads)

on failure one machine-readable line is printed to stderr:
  ERROR <kind>: <message>     with kind in {internal, config, missing-file, parse}

environment:
  CODEDHSI_OUT  overrides the output directory only (flags still win)
"""


def _resolve_config(args):
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    env_out = os.environ.get("CODEDHSI_OUT")
    if env_out:
        cfg.out = env_out
    if args.out:
        cfg.out = args.out
    return cfg


def _out_path(cfg, name):
    os.makedirs(cfg.out, exist_ok=True)
    return os.path.join(cfg.out, name)


def _write_manifest(cfg, command):
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    lines = [f"command = {command}", f"version = {__version__}", f"timestamp = {stamp}"]
    lines += cfg.manifest_lines()
    with open(_out_path(cfg, f"manifest_{command}.txt"), "w",
              encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _require(path, what):
    if not os.path.exists(path):
        raise MissingInputError(f"{what} not found: {path}")
    return path


def _load_cube(cfg):
    if cfg.cube:
        base = cfg.cube
    else:
        base = os.path.join(cfg.out, "cube")
    hdr = _require(base + ".hdr", "cube header")
    dat = _require(base + ".dat", "cube raster")
    return read_envi_file(hdr, dat)


def _load_masks(cfg):
    manifest = cfg.masks or os.path.join(cfg.out, "masks", "masks.txt")
    return read_masks(_require(manifest, "mask manifest"))


def _load_acquisition(cfg):
    coded = read_envi_file(_require(_out_path(cfg, "coded.hdr"), "coded stack header"),
                           _require(_out_path(cfg, "coded.dat"), "coded stack raster"))
    pan = read_envi_file(_require(_out_path(cfg, "pan.hdr"), "panchromatic header"),
                         _require(_out_path(cfg, "pan.dat"), "panchromatic raster"))
    sigma = None
    meta = _out_path(cfg, "acquisition.txt")
    if os.path.exists(meta):
        with open(meta, "r", encoding="ascii") as fh:
            for line in fh:
                key, _, value = line.partition("=")
                if key.strip() == "noise_sigma" and value.strip():
                    sigma = float(value)
    return AcquisitionStack(coded=coded, pan=pan[:, :, 0], noise_sigma=sigma)


def _scene_spec(cfg):
    return SceneSpec(
        rows=cfg.scene_rows, cols=cfg.scene_cols, bands=cfg.scene_bands,
        classes=cfg.scene_classes, geometry=cfg.scene_geometry,
        voronoi_seeds=cfg.scene_voronoi_seeds,
        intensity_spread=cfg.scene_intensity_spread,
        outlier_rate=cfg.scene_outlier_rate, rng_seed=cfg.scene_seed,
        min_separation_rad=cfg.scene_min_separation)


def _classifier_params(cfg):
    return ClassifierParams(
        block_size=cfg.clf_block_size,
        intensity_threshold=float(cfg.clf_threshold[0]),
        alpha=cfg.clf_alpha, reg_weight=cfg.clf_reg_weight,
        refresh_every=cfg.clf_refresh_every, merge_angle=cfg.clf_merge_angle)


def cmd_gen_scene(cfg, args):
    if cfg.cube:
        raise ConfigError("gen-scene generates its own cube; paths.cube must be unset")
    if args.seed is not None:
        cfg.scene_seed = args.seed
    scene = synth_scene(_scene_spec(cfg))
    cube = scene.cube
    if cfg.scene_outlier_rate > 0:
        cube, altered = inject_outliers(cube, scene.labels, cfg.scene_outlier_rate,
                                        rng_seed=cfg.scene_seed + 1)
        write_rows_csv(_out_path(cfg, "outlier_pixels.csv"),
                       [["flat_index"]] + [[int(i)] for i in altered])
    write_envi_file(_out_path(cfg, "cube.hdr"), _out_path(cfg, "cube.dat"), cube)
    write_label_map(_out_path(cfg, "labels_true.csv"), scene.labels)
    write_spectra_csv(_out_path(cfg, "spectra_true.csv"), scene.spectra,
                      names=[f"class_{k}" for k in range(1, scene.spectra.shape[0] + 1)])
    _write_manifest(cfg, "gen-scene")
    return 0


def _generate_and_write_masks(cfg, rows, cols, bands):
    masks = gen_masks(rows, cols, bands, cfg.sim_acquisitions,
                      open_fraction=cfg.sim_open_fraction, rng_seed=cfg.sim_seed)
    write_masks(os.path.join(cfg.out, "masks"), masks)
    return masks


def cmd_gen_masks(cfg, args):
    if args.seed is not None:
        cfg.sim_seed = args.seed
    if cfg.cube:
        cube = _load_cube(cfg)
        rows, cols, bands = cube.shape
    else:
        rows, cols, bands = cfg.scene_rows, cfg.scene_cols, cfg.scene_bands
    _generate_and_write_masks(cfg, rows, cols, bands)
    _write_manifest(cfg, "gen-masks")
    return 0


def cmd_simulate(cfg, args):
    if args.seed is not None:
        cfg.sim_seed = args.seed
    cube = _load_cube(cfg)
    rows, cols, bands = cube.shape
    manifest = cfg.masks or os.path.join(cfg.out, "masks", "masks.txt")
    if os.path.exists(manifest):
        masks = read_masks(manifest)
    else:
        masks = _generate_and_write_masks(cfg, rows, cols, bands)
    acq = acquire(cube, masks, noise_sigma=cfg.sim_noise_sigma, rng_seed=cfg.sim_seed)
    write_envi_file(_out_path(cfg, "coded.hdr"), _out_path(cfg, "coded.dat"), acq.coded)
    write_envi_file(_out_path(cfg, "pan.hdr"), _out_path(cfg, "pan.dat"),
                    acq.pan[:, :, None])
    with open(_out_path(cfg, "acquisition.txt"), "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"acquisitions = {acq.count}\n")
        fh.write(f"noise_sigma = {acq.noise_sigma!r}\n")
        fh.write(f"rng_seed = {cfg.sim_seed}\n")
    _write_manifest(cfg, "simulate")
    return 0


def cmd_classify(cfg, args):
    if len(cfg.clf_threshold) != 1:
        raise ConfigError("classify needs a single classifier.threshold; "
                          "use sweep for threshold lists")
    masks = _load_masks(cfg)
    acq = _load_acquisition(cfg)
    roi = None
    if cfg.labels:
        reference = read_label_map(_require(cfg.labels, "reference labels"),
                                   zero_is_outside=True)
        roi = reference > 0
    result = classify(acq, masks, _classifier_params(cfg), roi=roi)
    write_label_map(_out_path(cfg, "labels_pred.csv"), result.label_map)
    if result.models:
        write_spectra_csv(_out_path(cfg, "spectra_regions.csv"),
                          np.array([m.spectrum for m in result.models]),
                          names=[f"region_{k}" for k in range(1, result.n_regions + 1)])
    summary = result.summary()
    header = ["region", "size", "residual_rms", "gaussianity_stat",
              "clamped_mass", "reg_weight"]
    rows = [header] + [[row[h] for h in header] for row in summary]
    write_rows_csv(_out_path(cfg, "regions.csv"), rows)
    with open(_out_path(cfg, "labels_pred.ppm"), "wb") as fh:
        fh.write(render_label_map(result.label_map))
    _write_manifest(cfg, "classify")
    return 0


def _audit_edges(cfg):
    return (np.linspace(0.0, cfg.audit_bin_max, cfg.audit_bins + 1),
            np.linspace(0.0, cfg.audit_bin_max, cfg.audit_bins + 1))


def cmd_audit(cfg, args):
    cube = _load_cube(cfg)
    labels_path = cfg.labels or _out_path(cfg, "labels_pred.csv")
    labels = read_label_map(_require(labels_path, "label map"))
    sam_edges, rmse_edges = _audit_edges(cfg)
    report = audit_labeling(cube, labels, threshold_rad=cfg.audit_exceed_threshold,
                            sam_edges=sam_edges, rmse_edges=rmse_edges)
    write_rows_csv(_out_path(cfg, "audit_classes.csv"), report.table_rows())
    for name, edges, pick in (("audit_sam_hist.csv", sam_edges, lambda c: c.sam_hist),
                              ("audit_rmse_hist.csv", rmse_edges, lambda c: c.rmse_hist)):
        rows = [[repr(float(v)) for v in edges]]
        rows += [[repr(float(v)) for v in pick(c).probabilities] for c in report.classes]
        write_rows_csv(_out_path(cfg, name), rows)
    with open(_out_path(cfg, "sam_map.ppm"), "wb") as fh:
        fh.write(render_sam_map(report.sam_map, vmax=cfg.audit_bin_max))
    _write_manifest(cfg, "audit")
    return 0


def cmd_sweep(cfg, args):
    if not cfg.clf_threshold:
        raise ConfigError("sweep needs a nonempty classifier.threshold list")
    cube = _load_cube(cfg)
    masks = _load_masks(cfg)
    acq = _load_acquisition(cfg)
    labels_path = cfg.labels or _out_path(cfg, "labels_true.csv")
    reference = read_label_map(_require(labels_path, "reference labels"),
                               zero_is_outside=True)
    sam_edges, rmse_edges = _audit_edges(cfg)
    sam_grid, rmse_grid = sweep_histograms(
        cube, masks, acq, cfg.clf_threshold, reference, _classifier_params(cfg),
        sam_edges=sam_edges, rmse_edges=rmse_edges)
    for name, grid in (("sweep_sam", sam_grid), ("sweep_rmse", rmse_grid)):
        rows = [[repr(float(v)) for v in grid.bin_edges]]
        rows += [[repr(float(v)) for v in hist.probabilities] for hist in grid.rows]
        write_rows_csv(_out_path(cfg, name + ".csv"), rows)
        with open(_out_path(cfg, name + ".ppm"), "wb") as fh:
            fh.write(render_histogram_grid(grid))
    _write_manifest(cfg, "sweep")
    return 0


_COMMANDS = {
    "gen-scene": cmd_gen_scene,
    "gen-masks": cmd_gen_masks,
    "simulate": cmd_simulate,
    "classify": cmd_classify,
    "audit": cmd_audit,
    "sweep": cmd_sweep,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="codedhsi",
        description="Coded hyperspectral acquisition simulation, classification and audit.",
        epilog=_HELP_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, epilog=_HELP_EPILOG,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--config", metavar="PATH", help="run configuration file")
        p.add_argument("--seed", type=int, metavar="N",
                       help="override the command's generation seed")
        p.add_argument("--out", metavar="DIR", help="output directory")
    return parser


def _fail(kind, exc):
    print(f"ERROR {kind}: {exc}", file=sys.stderr)
    return EXIT_CODES[kind]


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve_config(args)
        return _COMMANDS[args.command](cfg, args)
    except (MissingInputError, FileNotFoundError) as exc:
        return _fail("missing-file", exc)
    except (ConfigSyntaxError, EnviFormatError) as exc:
        return _fail("parse", exc)
    except ConfigError as exc:
        return _fail("config", exc)
    except ValueError as exc:
        return _fail("config", exc)
    except Exception as exc:  # noqa: BLE001 - report and exit nonzero
        return _fail("internal", exc)


if __name__ == "__main__":
    raise SystemExit(main())
