"""
Dyadic Regions
==============

Parabolic dyadic cubes Q(j) (z-side 2^-j, t-side 2^-2j), strictly vertical
rectangles R(j, k) with k < j (z-side 2^-j, t-side 2^-2k) and the sampling
rectangles I x J of the discrete reproducing formula
(l(I) = 2^{-j-N}, l(J) = 2^{-j-N} + 2^{-k-N}).

Every family tiles the grid box with ceil(2L / side) regions per axis,
starting at the lower box corner. Regions are listed in row-major index
order; the region with multi-index (i_1, ..., i_{2n+1}) has ordinal
ravel_multi_index(index, counts).

Author: Yourl.Cloud Inc.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ResolutionError
from .grid import GridSpec
from .heisenberg_core import GroupPoint

logger = logging.getLogger(__name__)

ANCHOR_MODES = ("center", "corner")


@dataclass(frozen=True)
class DyadicRegion:
    """Axis-aligned box [corner, corner + sides) in the (z, t) coordinates."""

    j: int
    index: Tuple[int, ...]
    corner: Tuple[float, ...]
    z_side: float
    t_side: float

    kind = "region"

    @property
    def sides(self) -> Tuple[float, ...]:
        return (self.z_side,) * (len(self.index) - 1) + (self.t_side,)

    @property
    def measure(self) -> float:
        return self.z_side ** (len(self.index) - 1) * self.t_side

    @property
    def center(self) -> Tuple[float, ...]:
        return tuple(c + 0.5 * s for c, s in zip(self.corner, self.sides))

    def contains(self, point: Sequence[float]) -> bool:
        return all(c <= p < c + s for p, c, s in zip(point, self.corner, self.sides))

    def to_record(self) -> Dict:
        record = {
            "kind": self.kind,
            "j": self.j,
            "index": list(self.index),
            "corner": list(self.corner),
            "sides": list(self.sides),
        }
        for name in ("k", "N"):
            if hasattr(self, name):
                record[name] = getattr(self, name)
        return record


@dataclass(frozen=True)
class DyadicCube(DyadicRegion):
    kind = "cube"


@dataclass(frozen=True)
class VerticalRectangle(DyadicRegion):
    k: int = 0
    kind = "vertical"


@dataclass(frozen=True)
class SamplingRectangle(DyadicRegion):
    k: int = 0
    N: int = 0
    kind = "sampling"

    @property
    def ell_I(self) -> float:
        return self.z_side

    @property
    def ell_J(self) -> float:
        return self.t_side


@dataclass(frozen=True)
class Tiling:
    """Sides and per-axis counts of one dyadic family on a grid."""

    grid: GridSpec
    z_side: float
    t_side: float

    @property
    def sides(self) -> Tuple[float, ...]:
        return (self.z_side,) * (2 * self.grid.n) + (self.t_side,)

    @property
    def counts(self) -> Tuple[int, ...]:
        widths = [2.0 * self.grid.half_width_z] * (2 * self.grid.n) + [2.0 * self.grid.half_width_t]
        return tuple(max(1, math.ceil(w / s - 1e-12)) for w, s in zip(widths, self.sides))

    @property
    def size(self) -> int:
        return int(np.prod(self.counts))

    def corner(self, index: Sequence[int]) -> Tuple[float, ...]:
        return tuple(float(lo + i * s) for lo, i, s in zip(self.grid.lower, index, self.sides))

    def labels(self) -> np.ndarray:
        """Ordinal of the region owning every node, shaped like the grid."""
        per_axis = []
        for k, side in enumerate(self.sides):
            ix = np.floor((self.grid.axis(k) - self.grid.lower[k]) / side + 1e-12).astype(np.int64)
            per_axis.append(np.minimum(ix, self.counts[k] - 1))
        mesh = np.meshgrid(*per_axis, indexing="ij")
        return np.ravel_multi_index(tuple(mesh), self.counts)

    def anchor_indices(self, mode: str = "center") -> np.ndarray:
        """Flat node index of every region's anchor, in region ordinal order."""
        per_axis = [
            np.array([_axis_anchor(self.grid, k, self.grid.lower[k] + i * side, side, mode)
                      for i in range(self.counts[k])], dtype=np.int64)
            for k, side in enumerate(self.sides)
        ]
        mesh = np.meshgrid(*per_axis, indexing="ij")
        return np.ravel_multi_index(tuple(m.ravel() for m in mesh), self.grid.shape)


def _axis_anchor(grid: GridSpec, k: int, corner: float, side: float, mode: str) -> int:
    lo = grid.lower[k]
    h = grid.steps[k]
    upper = min(corner + side, lo + grid.shape[k] * h)
    first = math.ceil((max(corner, lo) - lo) / h - 1e-9)
    last = math.ceil((upper - lo) / h - 1e-9) - 1
    if first > last:
        raise ResolutionError(f"region [{corner:g}, {corner + side:g}) holds no node on axis {k}")
    if mode == "corner":
        return first
    nearest = int(math.floor((corner + 0.5 * side - lo) / h + 0.5))
    return min(max(nearest, first), last)


def cube_problem(grid: GridSpec, j: int) -> Optional[str]:
    if 2.0 ** (-j) < 2.0 * grid.h_z:
        return f"z-side {2.0 ** (-j):g} is below two cells ({2 * grid.h_z:g})"
    if 2.0 ** (-2 * j) < grid.h_t:
        return f"t-side {2.0 ** (-2 * j):g} is below one cell ({grid.h_t:g})"
    return None


def valid_scales(grid: GridSpec, search: range = range(-24, 25)) -> List[int]:
    """Resolvable cube scales j, largest regions first."""
    return [j for j in search if cube_problem(grid, j) is None]


def _resolvable_message(grid: GridSpec) -> str:
    valid = valid_scales(grid)
    return f"valid j range is {valid[0]}..{valid[-1]}" if valid else "no scale is resolvable"


def _enumerate(tiling: Tiling, factory) -> List[DyadicRegion]:
    return [factory(tuple(int(i) for i in index), tiling.corner(index))
            for index in np.ndindex(*tiling.counts)]


def cube_tiling(j: int, grid: GridSpec) -> Tiling:
    problem = cube_problem(grid, j)
    if problem is not None:
        raise ResolutionError(f"cube scale j={j} is not resolvable: {problem}; {_resolvable_message(grid)}")
    return Tiling(grid, 2.0 ** (-j), 2.0 ** (-2 * j))


def cubes_at_scale(j: int, grid: GridSpec) -> List[DyadicCube]:
    tiling = cube_tiling(j, grid)
    return _enumerate(tiling, lambda ix, c: DyadicCube(j, ix, c, tiling.z_side, tiling.t_side))


def vertical_tiling(j: int, k: int, grid: GridSpec) -> Tiling:
    if k >= j:
        raise ResolutionError(f"strictly vertical rectangles need k < j, got j={j}, k={k}")
    if 2.0 ** (-j) < 2.0 * grid.h_z:
        raise ResolutionError(f"z-side 2^{-j} is below two cells; {_resolvable_message(grid)}")
    if 2.0 ** (-2 * k) < grid.h_t:
        raise ResolutionError(f"t-side 2^{-2 * k} is below one cell ({grid.h_t:g})")
    return Tiling(grid, 2.0 ** (-j), 2.0 ** (-2 * k))


def vertical_rectangles(j: int, k: int, grid: GridSpec) -> List[VerticalRectangle]:
    tiling = vertical_tiling(j, k, grid)
    return _enumerate(tiling, lambda ix, c: VerticalRectangle(j, ix, c, tiling.z_side, tiling.t_side, k))


def sampling_tiling(j: int, k: int, N: int, grid: GridSpec) -> Tiling:
    if N < 0:
        raise ValueError(f"refinement N must be >= 0, got {N}")
    ell_i = 2.0 ** (-j - N)
    ell_j = 2.0 ** (-j - N) + 2.0 ** (-k - N)
    if ell_i < grid.h_z or ell_j < grid.h_t:
        raise ResolutionError(
            f"sampling rectangles for (j={j}, k={k}, N={N}) have sides {ell_i:g} x {ell_j:g}, "
            f"below the cell sizes {grid.h_z:g} x {grid.h_t:g}"
        )
    return Tiling(grid, ell_i, ell_j)


def sampling_rectangles(j: int, k: int, N: int, grid: GridSpec) -> List[SamplingRectangle]:
    tiling = sampling_tiling(j, k, N, grid)
    return _enumerate(
        tiling, lambda ix, c: SamplingRectangle(j, ix, c, tiling.z_side, tiling.t_side, k, N)
    )


def max_refinement(j: int, k: int, grid: GridSpec) -> int:
    """Largest N whose sampling rectangles are still resolvable (-1 if none)."""
    N = -1
    while N < 64:
        try:
            sampling_tiling(j, k, N + 1, grid)
        except ResolutionError:
            break
        N += 1
    return N


def anchor_index(region: DyadicRegion, grid: GridSpec, mode: str = "center") -> int:
    if mode not in ANCHOR_MODES:
        raise ValueError(f"anchor mode must be one of {ANCHOR_MODES}, got {mode!r}")
    per_axis = [_axis_anchor(grid, k, c, s, mode) for k, (c, s) in enumerate(zip(region.corner, region.sides))]
    return int(np.ravel_multi_index(tuple(per_axis), grid.shape))


def anchor(region: DyadicRegion, grid: GridSpec, mode: str = "center") -> GroupPoint:
    """The node nearest the region's centre inside region and box (or its lowest node for mode="corner")."""
    return GroupPoint(tuple(grid.node_coords(np.array([anchor_index(region, grid, mode)]))[0]))


def regions_to_json(regions: Sequence[DyadicRegion], path=None) -> str:
    text = json.dumps([r.to_record() for r in regions], indent=2)
    if path is not None:
        with open(path, "w") as handle:
            handle.write(text)
        logger.info(f"Wrote {len(regions)} regions to {path}")
    return text
