# Flagwave Error Types
# ====================
#
# Exception hierarchy shared by every flagwave module. Argument problems
# subclass ValueError so callers that already catch ValueError keep working.
#
# Author: Yourl.Cloud Inc.

from typing import Optional


class FlagwaveError(Exception):
    """Base class for all flagwave failures."""


class DimensionMismatchError(FlagwaveError, ValueError):
    """Points, indices or fields disagree on n."""


class GridMismatchError(FlagwaveError, ValueError):
    """Two sampled functions live on incompatible grids."""


class ResolutionError(FlagwaveError, ValueError):
    """A scale, cut or support cannot be represented on the grid."""


class AdmissibilityError(FlagwaveError, ValueError):
    """An exponent or parameter lies outside its admissible interval."""


class ConfigError(FlagwaveError):
    """Experiment configuration could not be parsed or validated."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        location = ""
        if path is not None:
            location = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{location}{message}")
