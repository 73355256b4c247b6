"""Binary pixmap (P5/P6) renders of label maps, SAM maps and histogram grids.

Zero-dependency, byte-deterministic output meant for inspection. Color
conventions: region ids cycle a fixed 256-entry palette built by
golden-ratio hue stepping, unclassified pixels are white, outside pixels
black; scalar maps use a linear black->red->yellow->white "hot" ramp with
sentinel pixels black. Exact byte layout in FORMATS.md.
"""

import colorsys

import numpy as np

_GOLDEN = 0.6180339887498949


def label_palette(n=256):
    """Fixed palette: hue k*golden-ratio mod 1, saturation 0.65, value 0.95."""
    colors = np.empty((n, 3), dtype=np.uint8)
    for k in range(n):
        r, g, b = colorsys.hsv_to_rgb((k * _GOLDEN) % 1.0, 0.65, 0.95)
        colors[k] = (round(r * 255), round(g * 255), round(b * 255))
    return colors


def hot_ramp(values):
    """Map values in [0, 1] to the hot ramp; returns uint8 RGB of same shape + (3,)."""
    t = np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0)
    rgb = np.stack([np.clip(3.0 * t, 0.0, 1.0),
                    np.clip(3.0 * t - 1.0, 0.0, 1.0),
                    np.clip(3.0 * t - 2.0, 0.0, 1.0)], axis=-1)
    return np.round(rgb * 255.0).astype(np.uint8)


def ppm_bytes(rgb):
    """Binary P6 from a (rows, cols, 3) uint8 array."""
    rgb = np.asarray(rgb, dtype=np.uint8)
    rows, cols = rgb.shape[:2]
    return f"P6\n{cols} {rows}\n255\n".encode("ascii") + rgb.tobytes()


def pgm_bytes(gray):
    """Binary P5 from a (rows, cols) uint8 array."""
    gray = np.asarray(gray, dtype=np.uint8)
    rows, cols = gray.shape
    return f"P5\n{cols} {rows}\n255\n".encode("ascii") + gray.tobytes()


def render_label_map(labels):
    """Label map as P6: colors for regions, white unclassified, black outside."""
    labels = np.asarray(labels)
    palette = label_palette()
    rgb = np.zeros(labels.shape + (3,), dtype=np.uint8)
    rgb[labels == 0] = (255, 255, 255)
    pos = labels > 0
    if np.any(pos):
        rgb[pos] = palette[(labels[pos] - 1) % palette.shape[0]]
    return ppm_bytes(rgb)


def render_sam_map(values, vmax=0.5):
    """Scalar map as P6 via the hot ramp; negative sentinel pixels are black."""
    values = np.asarray(values, dtype=np.float64)
    if vmax <= 0:
        raise ValueError("vmax must be positive")
    rgb = hot_ramp(values / vmax)
    rgb[values < 0] = (0, 0, 0)
    return ppm_bytes(rgb)


def render_gray(values, vmax):
    """Scalar map as P5 linear grayscale; negative sentinel pixels are 0."""
    values = np.asarray(values, dtype=np.float64)
    if vmax <= 0:
        raise ValueError("vmax must be positive")
    gray = np.round(np.clip(values / vmax, 0.0, 1.0) * 255.0).astype(np.uint8)
    gray[values < 0] = 0
    return pgm_bytes(gray)


def render_histogram_grid(grid, cell=8):
    """Histogram grid as P6: one row block per histogram, hot-ramp colored.

    Probabilities are normalized by the grid maximum; each matrix cell is
    drawn as a cell x cell pixel block.
    """
    matrix = grid.as_matrix()
    peak = float(matrix.max()) or 1.0
    rgb = hot_ramp(matrix / peak)
    rgb = np.repeat(np.repeat(rgb, cell, axis=0), cell, axis=1)
    return ppm_bytes(rgb)
