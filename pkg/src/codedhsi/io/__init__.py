"""File formats and renders; every format is documented in FORMATS.md."""

from .envi import (EnviHeader, parse_envi_header, read_envi, read_envi_file,
                   write_envi, write_envi_file)
from .files import (read_label_map, read_masks, read_spectra_csv,
                    write_label_map, write_masks, write_rows_csv,
                    write_spectra_csv)
from .render import (hot_ramp, label_palette, pgm_bytes, ppm_bytes,
                     render_gray, render_histogram_grid, render_label_map,
                     render_sam_map)

__all__ = [
    "EnviHeader", "parse_envi_header", "read_envi", "read_envi_file",
    "write_envi", "write_envi_file",
    "read_label_map", "read_masks", "read_spectra_csv",
    "write_label_map", "write_masks", "write_rows_csv", "write_spectra_csv",
    "hot_ramp", "label_palette", "pgm_bytes", "ppm_bytes",
    "render_gray", "render_histogram_grid", "render_label_map", "render_sam_map",
]
