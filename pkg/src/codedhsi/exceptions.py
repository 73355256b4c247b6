"""Error types raised by the library.

Plain ``ValueError`` is used for ordinary bad arguments (shape mismatches,
out-of-range parameters); the subclasses below mark conditions callers may
want to handle specifically.
"""


class DegenerateRegionError(ValueError):
    """Region statistics cannot be formed (e.g. zero panchromatic mean)."""


class DegeneratePixelError(ValueError):
    """The mask blocks every band at this pixel; no intensity can be fit."""


class RankDeficientError(ValueError):
    """The normal matrix of the spectrum estimator is singular.

    Raised when the sensing configuration does not determine a spectrum
    (typically with reg_weight = 0); increase reg_weight above zero.
    """


class InsufficientSampleError(ValueError):
    """Too few residual samples for the normality test (need >= 20)."""


class UndefinedAngleError(ValueError):
    """Spectral angle is undefined because one spectrum is the zero vector."""


class EnviFormatError(ValueError):
    """ENVI header or raster payload could not be parsed."""
