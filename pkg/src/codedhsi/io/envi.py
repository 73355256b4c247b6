"""Minimal ENVI header/raster codec.

Supported subset (see FORMATS.md): data types 4 (float32), 5 (float64) and
12 (uint16); interleaves BSQ, BIL and BIP; byte order 0 (little endian) or
1 (big endian); arbitrary header offset. Cubes are always returned in
(row, col, band) order regardless of the source interleave. The writer
emits BSQ float64 little-endian with deterministic header text, so
write -> read roundtrips are lossless for float64 payloads.
"""

from dataclasses import dataclass

import numpy as np

from ..exceptions import EnviFormatError
from ..validation import check_cube

_DTYPES = {4: np.dtype("<f4"), 5: np.dtype("<f8"), 12: np.dtype("<u2")}
_INTERLEAVES = ("bsq", "bil", "bip")


@dataclass
class EnviHeader:
    samples: int          # columns
    lines: int            # rows
    bands: int
    interleave: str       # bsq | bil | bip
    data_type: int
    byte_order: int = 0
    header_offset: int = 0

    def __post_init__(self):
        if min(self.samples, self.lines, self.bands) < 1:
            raise EnviFormatError("samples, lines and bands must be positive")
        if self.interleave not in _INTERLEAVES:
            raise EnviFormatError(f"unsupported interleave {self.interleave!r}")
        if self.data_type not in _DTYPES:
            raise EnviFormatError(
                f"unsupported data type {self.data_type}; supported: {sorted(_DTYPES)}")
        if self.byte_order not in (0, 1):
            raise EnviFormatError(f"byte order must be 0 or 1, got {self.byte_order}")
        if self.header_offset < 0:
            raise EnviFormatError("header offset must be nonnegative")


def parse_envi_header(text):
    """Parse ENVI ``key = value`` header text into an EnviHeader.

    Brace-delimited values (description = { ... }) may span lines and are
    ignored. Raises EnviFormatError naming the offending line.
    """
    fields = {}
    in_braces = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if in_braces:
            if "}" in line:
                in_braces = False
            continue
        if not line or line.upper() == "ENVI" or line.startswith(";"):
            continue
        if "=" not in line:
            raise EnviFormatError(f"header line {lineno} is not 'key = value': {line!r}")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if value.startswith("{"):
            if "}" not in value:
                in_braces = True
            continue
        fields[key] = value

    def need_int(key):
        if key not in fields:
            raise EnviFormatError(f"header is missing required field {key!r}")
        try:
            return int(fields[key])
        except ValueError as exc:
            raise EnviFormatError(f"header field {key!r} is not an integer: "
                                  f"{fields[key]!r}") from exc

    interleave = fields.get("interleave", "")
    return EnviHeader(
        samples=need_int("samples"),
        lines=need_int("lines"),
        bands=need_int("bands"),
        interleave=interleave.lower(),
        data_type=need_int("data type"),
        byte_order=need_int("byte order") if "byte order" in fields else 0,
        header_offset=need_int("header offset") if "header offset" in fields else 0,
    )


def read_envi(header_text, data_bytes, scale_divisor=None):
    """Decode an ENVI raster into a (rows, cols, bands) float64 cube.

    Integer payloads are rescaled to [0, 1] by scale_divisor (default: the
    maximum value present). Raises EnviFormatError with expected/actual byte
    sizes on truncated payloads.
    """
    header = parse_envi_header(header_text)
    dtype = _DTYPES[header.data_type]
    if header.byte_order == 1:
        dtype = dtype.newbyteorder(">")
    n_values = header.samples * header.lines * header.bands
    expected = header.header_offset + n_values * dtype.itemsize
    if len(data_bytes) < expected:
        raise EnviFormatError(
            f"raster payload truncated: expected {expected} bytes "
            f"(offset {header.header_offset} + {n_values} x {dtype.itemsize}), "
            f"got {len(data_bytes)}")
    flat = np.frombuffer(data_bytes, dtype=dtype,
                         count=n_values, offset=header.header_offset)

    if header.interleave == "bsq":
        cube = flat.reshape(header.bands, header.lines, header.samples).transpose(1, 2, 0)
    elif header.interleave == "bil":
        cube = flat.reshape(header.lines, header.bands, header.samples).transpose(0, 2, 1)
    else:  # bip
        cube = flat.reshape(header.lines, header.samples, header.bands)

    cube = cube.astype(np.float64)
    if np.issubdtype(_DTYPES[header.data_type], np.integer):
        if scale_divisor is None:
            scale_divisor = float(cube.max()) or 1.0
        cube = cube / float(scale_divisor)
    return cube


def write_envi(cube):
    """Encode a cube as (header_text, data_bytes): BSQ float64 little-endian."""
    cube = check_cube(cube)
    rows, cols, bands = cube.shape
    header = (
        "ENVI\n"
        f"samples = {cols}\n"
        f"lines = {rows}\n"
        f"bands = {bands}\n"
        "header offset = 0\n"
        "file type = ENVI Standard\n"
        "data type = 5\n"
        "interleave = bsq\n"
        "byte order = 0\n"
    )
    payload = np.ascontiguousarray(cube.transpose(2, 0, 1), dtype="<f8").tobytes()
    return header, payload


def read_envi_file(header_path, data_path, scale_divisor=None):
    with open(header_path, "r", encoding="ascii") as fh:
        header_text = fh.read()
    with open(data_path, "rb") as fh:
        data = fh.read()
    return read_envi(header_text, data, scale_divisor=scale_divisor)


def write_envi_file(header_path, data_path, cube):
    header_text, payload = write_envi(cube)
    with open(header_path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(header_text)
    with open(data_path, "wb") as fh:
        fh.write(payload)
