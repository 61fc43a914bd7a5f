"""
Flagwave
========

Discrete flag Littlewood-Paley analysis on the Heisenberg group H^n:
sampled group arithmetic and convolution, one- and two-parameter wavelets,
dyadic tilings, the discrete reproducing formula, truncated singular
kernels, maximal functions and the almost-orthogonality lab.

Author: Yourl.Cloud Inc.
"""

__version__ = "1.0.0"

from .errors import (  # noqa: E402
    AdmissibilityError,
    ConfigError,
    DimensionMismatchError,
    FlagwaveError,
    GridMismatchError,
    ResolutionError,
)
from .grid import GridSpec, Sampled1DFunction, SampledFunction, convolve  # noqa: E402
from .heisenberg_core import GroupPoint, MultiIndex  # noqa: E402
from .wavelets import WaveletBank, WaveletSpec  # noqa: E402
from .flag_transform import FlagTransform, ScaleWindow  # noqa: E402

__all__ = [
    "AdmissibilityError",
    "ConfigError",
    "DimensionMismatchError",
    "FlagTransform",
    "FlagwaveError",
    "GridMismatchError",
    "GridSpec",
    "GroupPoint",
    "MultiIndex",
    "ResolutionError",
    "Sampled1DFunction",
    "SampledFunction",
    "ScaleWindow",
    "WaveletBank",
    "WaveletSpec",
    "convolve",
]
