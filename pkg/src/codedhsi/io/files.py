"""Plain-text and packed-bit storage for label maps, masks and spectra.

All writers are deterministic (same input -> identical bytes); floats are
written with shortest-roundtrip repr so read(write(x)) == x exactly.
Formats are documented in FORMATS.md.
"""

import os

import numpy as np

from ..acquisition import MaskSet
from ..validation import check_label_map


def write_label_map(path, labels):
    """Label map as integer CSV, one image row per line."""
    labels = check_label_map(labels)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for row in labels:
            fh.write(",".join(str(int(v)) for v in row))
            fh.write("\n")


def read_label_map(path, zero_is_outside=False):
    """Read an integer label map CSV.

    Public ground-truth rasters use 0 for "not annotated"; pass
    zero_is_outside=True to map those pixels to the outside sentinel -1.
    Toolkit-produced maps keep 0 = unclassified (the default).
    """
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([int(v) for v in line.split(",")])
    if not rows:
        raise ValueError(f"{path}: empty label map")
    labels = np.array(rows, dtype=np.int32)
    if zero_is_outside:
        labels[labels == 0] = -1
    return labels


def _mask_file(index):
    return f"mask_{index:03d}.bits"


def write_masks(directory, masks, manifest_name="masks.txt"):
    """Mask set as one packed-bit file per acquisition plus a text manifest.

    Each .bits file is numpy packbits of the mask rows flattened row-major
    (zero-padded to a byte boundary); the manifest records the geometry and
    generation parameters needed to reload the set identically.
    """
    os.makedirs(directory, exist_ok=True)
    lines = [
        f"rows = {masks.rows}",
        f"cols = {masks.cols}",
        f"bands = {masks.bands}",
        f"count = {masks.count}",
        f"open_fraction = {'' if masks.open_fraction is None else repr(masks.open_fraction)}",
        f"rng_seed = {'' if masks.rng_seed is None else masks.rng_seed}",
    ]
    for a in range(masks.count):
        packed = np.packbits(masks.masks[a].ravel())
        with open(os.path.join(directory, _mask_file(a)), "wb") as fh:
            fh.write(packed.tobytes())
        lines.append(f"file = {_mask_file(a)}")
    manifest = os.path.join(directory, manifest_name)
    with open(manifest, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return manifest


def read_masks(manifest_path):
    directory = os.path.dirname(manifest_path)
    fields = {}
    files = []
    with open(manifest_path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key == "file":
                files.append(value)
            else:
                fields[key] = value
    rows, cols, bands, count = (int(fields[k]) for k in ("rows", "cols", "bands", "count"))
    if len(files) != count:
        raise ValueError(f"{manifest_path}: lists {len(files)} files for count {count}")
    sheared = cols + bands - 1
    n_entries = rows * sheared
    stack = np.empty((count, rows, sheared), dtype=np.uint8)
    for a, name in enumerate(files):
        with open(os.path.join(directory, name), "rb") as fh:
            packed = np.frombuffer(fh.read(), dtype=np.uint8)
        bits = np.unpackbits(packed)[:n_entries]
        stack[a] = bits.reshape(rows, sheared)
    open_fraction = float(fields["open_fraction"]) if fields.get("open_fraction") else None
    rng_seed = int(fields["rng_seed"]) if fields.get("rng_seed") else None
    return MaskSet(stack, bands=bands, open_fraction=open_fraction, rng_seed=rng_seed)


def write_spectra_csv(path, spectra, names=None):
    """Spectra as CSV, one spectrum per column, optional header row."""
    spectra = np.atleast_2d(np.asarray(spectra, dtype=np.float64))
    if names is not None and len(names) != spectra.shape[0]:
        raise ValueError("one name per spectrum required")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        if names is not None:
            fh.write(",".join(str(n) for n in names) + "\n")
        for w in range(spectra.shape[1]):
            fh.write(",".join(repr(float(s[w])) for s in spectra) + "\n")


def read_spectra_csv(path, has_header=True):
    """Returns (spectra array (n, bands), names or None)."""
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty spectra file")
    names = None
    if has_header:
        names = lines[0].split(",")
        lines = lines[1:]
    columns = [list(map(float, ln.split(","))) for ln in lines]
    return np.array(columns, dtype=np.float64).T, names


def write_rows_csv(path, rows):
    """CSV from already-formatted row lists (mixed types allowed)."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")
