"""
Maximal Functions
=================

Hardy-Littlewood and strong maximal functions on the grid, as suprema of
averages of |f| over group-translated offset sets {x o w^-1 : w in S}. S is
a rho-ball for the one-parameter operator and a z-ball times a t-interval
for the strong one. Both sups run over dyadic scale sets; the t-lengths of
the strong family include r^2 for every ball radius r, so every ball is also
a member of the rectangle family.

Author: Yourl.Cloud Inc.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import AdmissibilityError
from .grid import GridSpec, SampledFunction, convolve
from .heisenberg_core import norm_arrays

logger = logging.getLogger(__name__)

TOL = 1e-12


def hl_radii(grid: GridSpec) -> List[float]:
    """0 and 2^m h_z while the ball stays within half the box."""
    radii = [0.0]
    r = grid.h_z
    while r <= grid.half_width_z / 2.0 + TOL and r * r <= grid.half_width_t / 2.0 + TOL:
        radii.append(r)
        r *= 2.0
    return radii


def strong_scales(grid: GridSpec) -> List[Tuple[float, float]]:
    """Pairs (z-radius, t-half-length) of the rectangle family."""
    radii = hl_radii(grid)
    lengths = {r * r for r in radii}
    b = grid.h_t
    while b <= grid.half_width_t / 2.0 + TOL:
        lengths.add(b)
        b *= 2.0
    return [(r, ell) for r in radii for ell in sorted(lengths)]


def _offset_mask(grid: GridSpec, z_radius: float, t_length: float) -> np.ndarray:
    coords = grid.node_coords()
    z_abs = np.sqrt(np.sum(coords[:, :-1] ** 2, axis=-1))
    inside = (z_abs <= z_radius + TOL) & (np.abs(coords[:, -1]) <= t_length + TOL)
    return inside.reshape(grid.shape)


class OffsetAverager:
    """Averages of one nonnegative field over cached offset sets."""

    def __init__(self, f_abs: SampledFunction):
        self.field = f_abs
        self._cache: Dict[Tuple[float, float], np.ndarray] = {}

    def average(self, z_radius: float, t_length: float) -> np.ndarray:
        key = (z_radius, t_length)
        if key not in self._cache:
            if z_radius == 0 and t_length == 0:
                # the offset set {e}: the point itself
                self._cache[key] = np.asarray(self.field.values, dtype=float)
            else:
                grid = self.field.grid
                mask = _offset_mask(grid, z_radius, t_length)
                weights = mask / (np.count_nonzero(mask) * grid.cell_volume)
                avg = convolve(self.field, SampledFunction(grid, weights), summation="right")
                self._cache[key] = np.asarray(avg.values)
        return self._cache[key]


def _nonnegative(f: SampledFunction) -> SampledFunction:
    return f.with_values(np.abs(f.values))


def hl_maximal(f: SampledFunction, radii: Optional[Sequence[float]] = None) -> SampledFunction:
    """sup over rho-balls of radius r in the dyadic set of averages of |f|."""
    grid = f.grid
    radii = hl_radii(grid) if radii is None else radii
    averager = OffsetAverager(_nonnegative(f))
    best = np.zeros(grid.shape)
    for r in radii:
        best = np.maximum(best, averager.average(r, r * r))
    return SampledFunction(grid, best)


def strong_maximal(f: SampledFunction, scales: Optional[Sequence[Tuple[float, float]]] = None) -> SampledFunction:
    """sup over z-ball x t-interval offset sets of averages of |f|."""
    grid = f.grid
    scales = strong_scales(grid) if scales is None else scales
    averager = OffsetAverager(_nonnegative(f))
    best = np.zeros(grid.shape)
    for z_radius, t_length in scales:
        best = np.maximum(best, averager.average(z_radius, t_length))
    return SampledFunction(grid, best)


def ball_volume_ratio(grid: GridSpec, inner: float, outer: float) -> float:
    """Node-count ratio |B(0, inner)| / |B(0, outer)| under rho."""
    rho = norm_arrays(grid.node_coords())
    return float(np.count_nonzero(rho <= inner + TOL)) / float(np.count_nonzero(rho <= outer + TOL))


@dataclass(frozen=True)
class MaximalReport:
    p: float
    r: float
    family_size: int
    ratio: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def check_fs_exponents(p: float, r: float, n: int):
    lower = 4.0 * n / (4.0 * n + 1.0)
    if not lower < p <= 1.0:
        raise AdmissibilityError(f"p={p} must satisfy 4n/(4n+1) < p <= 1 ({lower:g} < p <= 1)")
    if not lower < r < p:
        raise AdmissibilityError(f"r={r} must satisfy 4n/(4n+1) < r < p ({lower:g} < r < {p:g})")


def _lp(values: np.ndarray, p: float, cell_volume: float) -> float:
    return (float(np.sum(values ** p)) * cell_volume) ** (1.0 / p)


def fs_vector_check(family: Sequence[SampledFunction], p: float, r: float,
                    scales: Optional[Sequence[Tuple[float, float]]] = None) -> MaximalReport:
    """||(sum_i M_s(|f_i|^r)^{2/r})^{1/2}||_p / ||(sum_i |f_i|^2)^{1/2}||_p."""
    if not family:
        raise ValueError("the Fefferman-Stein check needs a nonempty family")
    grid = family[0].grid
    check_fs_exponents(p, r, grid.n)
    num = np.zeros(grid.shape)
    den = np.zeros(grid.shape)
    for f in family:
        powered = f.with_values(np.abs(f.values) ** r)
        num += strong_maximal(powered, scales).values ** (2.0 / r)
        den += np.abs(f.values) ** 2
    bottom = _lp(np.sqrt(den), p, grid.cell_volume)
    if bottom == 0:
        raise ValueError("the Fefferman-Stein check needs a family that is not identically zero")
    ratio = _lp(np.sqrt(num), p, grid.cell_volume) / bottom
    logger.info(f"Fefferman-Stein check (p={p}, r={r}, {len(family)} functions): ratio {ratio:.4f}")
    return MaximalReport(p=p, r=r, family_size=len(family), ratio=ratio)


def coefficient_domination(values: np.ndarray, labels: np.ndarray, grid: GridSpec, r: float,
                           scales: Optional[Sequence[Tuple[float, float]]] = None) -> float:
    """max over regions of |c_R| / min_{u in R} M_s(sum_R' |c_R'|^r chi_R')(u)^{1/r}.

    ``labels`` maps every node to its region ordinal, as returned by
    ``Tiling.labels``.
    """
    values = np.abs(np.asarray(values, dtype=float))
    painted = SampledFunction(grid, values[labels] ** r)
    dominating = strong_maximal(painted, scales).values ** (1.0 / r)
    worst = 0.0
    flat_labels = labels.ravel()
    flat_dom = dominating.ravel()
    lows = np.full(values.size, math.inf)
    np.minimum.at(lows, flat_labels, flat_dom)
    for ordinal, c in enumerate(values):
        if c > 0 and np.isfinite(lows[ordinal]):
            worst = max(worst, c / lows[ordinal])
    return worst
