"""
Flag Transform
==============

Analysis and synthesis with flag wavelets: coefficients sampled at the
anchors of the sampling rectangles, the reproducing sum
T_N f = sum_R |R| psi~_{j,k}(. o a_R^-1) (psi_{j,k} * f)(a_R) and its limit
P f = sum psi~_{j,k} * psi_{j,k} * f over the window, the measured error
operator R_N = I - s T_N, the flag square function and the H^p_flag norm
estimator.

Author: Yourl.Cloud Inc.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .dyadic import ANCHOR_MODES, Tiling, cube_tiling, sampling_tiling, vertical_tiling
from .errors import AdmissibilityError
from .grid import GridSpec, SampledFunction, convolve, inner, l2_norm, smooth_window
from .wavelets import WaveletBank

logger = logging.getLogger(__name__)

Scale = Tuple[int, int]


def calderon_constant(alpha: float = 1.0) -> float:
    """c_alpha = 2 (alpha ln 2)^2 for scale pitch alpha."""
    return 2.0 * (alpha * math.log(2.0)) ** 2


def hardy_lower_bound(n: int) -> float:
    return 4.0 * n / (4.0 * n + 1.0)


def check_hardy_exponent(p: float, n: int) -> float:
    lower = hardy_lower_bound(n)
    if not lower < p <= 1.0:
        raise AdmissibilityError(
            f"p={p} is outside the admissible interval 4n/(4n+1) < p <= 1 ({lower:g} < p <= 1 for n={n})"
        )
    return p


@dataclass(frozen=True)
class ScaleWindow:
    """Finite window of octave scales j (cube/z) and k (central), plus refinements N."""

    j_values: Tuple[int, ...]
    k_values: Tuple[int, ...]
    N_values: Tuple[int, ...] = (0, 1, 2, 3)

    def __post_init__(self):
        for name in ("j_values", "k_values", "N_values"):
            values = tuple(sorted(set(int(v) for v in getattr(self, name))))
            if not values:
                raise ValueError(f"scale window needs at least one entry in {name}")
            object.__setattr__(self, name, values)
        if self.N_values[0] < 0:
            raise ValueError(f"refinements must be >= 0, got {self.N_values}")

    def pairs(self) -> List[Scale]:
        return [(j, k) for j in self.j_values for k in self.k_values]

    def vertical_pairs(self) -> List[Scale]:
        return [(j, k) for j, k in self.pairs() if k < j]


@dataclass
class CoefficientBlock:
    j: int
    k: int
    N: int
    tiling: Tiling
    anchors: np.ndarray
    values: np.ndarray

    @property
    def measure(self) -> float:
        return self.tiling.z_side ** (2 * self.tiling.grid.n) * self.tiling.t_side


@dataclass
class FlagCoefficients:
    """Coefficients c_R for every (j, k) of the window at one refinement N."""

    window: ScaleWindow
    N: int
    grid: GridSpec
    blocks: Dict[Scale, CoefficientBlock] = field(default_factory=dict)

    def flat(self) -> np.ndarray:
        return np.concatenate([self.blocks[key].values for key in sorted(self.blocks)])

    def scaled(self, factor: float) -> "FlagCoefficients":
        return self.with_values({key: b.values * factor for key, b in self.blocks.items()})

    def with_values(self, values: Dict[Scale, np.ndarray]) -> "FlagCoefficients":
        blocks = {
            key: CoefficientBlock(b.j, b.k, b.N, b.tiling, b.anchors, np.asarray(values[key], dtype=float))
            for key, b in self.blocks.items()
        }
        return FlagCoefficients(self.window, self.N, self.grid, blocks)

    def to_records(self) -> List[Dict]:
        records = []
        coords = {key: self.grid.node_coords(b.anchors) for key, b in self.blocks.items()}
        for key in sorted(self.blocks):
            block = self.blocks[key]
            for ordinal, index in enumerate(np.ndindex(*block.tiling.counts)):
                records.append({
                    "j": block.j,
                    "k": block.k,
                    "N": block.N,
                    "index": [int(i) for i in index],
                    "anchor": [float(c) for c in coords[key][ordinal]],
                    "value": float(block.values[ordinal]),
                })
        return records

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_records(), indent=1)
        if path is not None:
            with open(path, "w") as handle:
                handle.write(text)
        return text


class FlagTransform:
    """Analysis, synthesis and norms for one wavelet bank and scale window."""

    def __init__(self, bank: WaveletBank, window: ScaleWindow, scale: float = 1.0,
                 anchor_mode: str = "center"):
        if anchor_mode not in ANCHOR_MODES:
            raise ValueError(f"anchor mode must be one of {ANCHOR_MODES}, got {anchor_mode!r}")
        bank.check_window(window.j_values, window.k_values)
        self.bank = bank
        self.window = window
        self.scale = scale
        self.anchor_mode = anchor_mode

    @property
    def grid(self) -> GridSpec:
        return self.bank.grid

    def with_anchor_mode(self, anchor_mode: str) -> "FlagTransform":
        return FlagTransform(self.bank, self.window, self.scale, anchor_mode)

    # Coefficients

    def analyze(self, f: SampledFunction, N: int) -> FlagCoefficients:
        """c_R = (psi_{j,k} * f)(a_R) on the sampling rectangles of refinement N."""
        coeffs = FlagCoefficients(self.window, N, self.grid)
        for j, k in self.window.pairs():
            tiling = sampling_tiling(j, k, N, self.grid)
            anchors = tiling.anchor_indices(self.anchor_mode)
            values = convolve(self.bank.flag(j, k), f, at=anchors)
            coeffs.blocks[(j, k)] = CoefficientBlock(j, k, N, tiling, anchors, np.asarray(values, dtype=float))
        logger.debug(f"analyze N={N}: {coeffs.flat().size} coefficients")
        return coeffs

    def synthesize(self, coeffs: FlagCoefficients) -> SampledFunction:
        """sum_R |R| c_R psi~_{j,k}(x o a_R^-1), accumulated one (j, k) block at a time."""
        grid = self.grid
        total = np.zeros(grid.shape)
        for key in sorted(coeffs.blocks):
            block = coeffs.blocks[key]
            if not np.any(block.values):
                continue
            mass = np.zeros(grid.size)
            # anchors are distinct nodes inside disjoint regions
            mass[block.anchors] = block.measure * block.values / grid.cell_volume
            part = convolve(self.bank.flag_reflected(block.j, block.k),
                            SampledFunction(grid, mass.reshape(grid.shape)), summation="right")
            total += part.values
        return SampledFunction(grid, total)

    def reconstruct(self, f: SampledFunction, N: int) -> SampledFunction:
        return self.synthesize(self.analyze(f, N)) * self.scale

    def window_limit(self, f: SampledFunction) -> SampledFunction:
        """P f = sum_{j,k} psi~_{j,k} * psi_{j,k} * f, the N -> infinity limit of T_N f.

        Runs through the same block order and gather as synthesize, with the
        coefficient field sampled at every node instead of at the anchors.
        """
        grid = self.grid
        total = np.zeros(grid.shape)
        for key in sorted(self.window.pairs()):
            coefficients = convolve(self.bank.flag(*key), f)
            part = convolve(self.bank.flag_reflected(*key), coefficients, summation="right")
            total += part.values
        return SampledFunction(grid, total)

    def sampling_error(self, f: SampledFunction, N: int, limit: Optional[SampledFunction] = None) -> float:
        """||P f - T_N f|| / ||P f||: what the anchor sampling of refinement N loses."""
        limit = self.window_limit(f) if limit is None else limit
        norm = l2_norm(limit)
        if norm == 0:
            raise ValueError("the field has no content inside the scale window")
        return l2_norm(limit - self.synthesize(self.analyze(f, N))) / norm

    def reconstruction_error(self, f: SampledFunction, N: int) -> float:
        """||f - s T_N f|| / ||f||; bounded below by the window floor ||f - s P f|| / ||f||."""
        norm = l2_norm(f)
        if norm == 0:
            raise ValueError("reconstruction error is undefined for the zero field")
        return l2_norm(f - self.reconstruct(f, N)) / norm

    def window_floor(self, f: SampledFunction, limit: Optional[SampledFunction] = None) -> float:
        norm = l2_norm(f)
        if norm == 0:
            raise ValueError("reconstruction error is undefined for the zero field")
        limit = self.window_limit(f) if limit is None else limit
        return l2_norm(f - limit * self.scale) / norm

    def calibration_field(self, seed: int) -> SampledFunction:
        """Unit-norm P w for seeded Gaussian noise w under a smooth box window: content inside the window."""
        grid = self.grid
        rng = np.random.default_rng(seed)
        coords = grid.node_coords().reshape(grid.shape + (grid.d,))
        halves = [grid.half_width_z] * (2 * grid.n) + [grid.half_width_t]
        envelope = np.ones(grid.shape)
        for k, half in enumerate(halves):
            envelope *= smooth_window(coords[..., k] / (0.9 * half))
        field = self.window_limit(SampledFunction(grid, rng.normal(size=grid.shape) * envelope))
        norm = l2_norm(field)
        if norm == 0:
            raise ValueError("the scale window annihilates the calibration noise")
        return field * (1.0 / norm)

    def fit_global_scale(self, fields: Sequence[SampledFunction], N: int) -> float:
        """Least-squares s minimising sum ||f - s T_N f||^2; stored on the transform."""
        num = 0.0
        den = 0.0
        for f in fields:
            g = self.synthesize(self.analyze(f, N))
            num += inner(f, g)
            den += inner(g, g)
        if den == 0:
            raise ValueError("synthesis vanished on every calibration field")
        self.scale = num / den
        logger.info(
            f"Fitted global scale s={self.scale:.6g} at N={N} "
            f"(c_alpha for octave scales is {calderon_constant():.6g})"
        )
        return self.scale

    def single_atom(self, j: int, k: int, N: int, ordinal: int, value: float = 1.0) -> FlagCoefficients:
        coeffs = self.analyze(SampledFunction.zeros(self.grid), N)
        values = {key: np.zeros_like(b.values) for key, b in coeffs.blocks.items()}
        values[(j, k)][ordinal] = value
        return coeffs.with_values(values)

    def gram_response(self, j: int, k: int, N: int, ordinal: int) -> Dict[Scale, float]:
        """max |c| per (j', k') when analysing the synthesized unit atom at (j, k, ordinal)."""
        atom = self.synthesize(self.single_atom(j, k, N, ordinal))
        coeffs = self.analyze(atom, N)
        return {key: float(np.max(np.abs(b.values))) for key, b in coeffs.blocks.items()}

    def inverse_surrogate(self, f: SampledFunction, N: int, m0: int = 3, p: float = 1.0) -> Dict[str, float]:
        """h = sum_{m <= m0} R_N^m f, with the L2 and H^p ratios ||f|| / ||h||."""
        if not 0 <= m0 <= 3:
            raise ValueError(f"Neumann depth must lie in 0..3, got {m0}")
        term = f
        h = f
        for _ in range(m0):
            term = term - self.reconstruct(term, N)
            h = h + term
        return {
            "m0": m0,
            "l2_ratio": l2_norm(f) / l2_norm(h),
            "hp_ratio": self.hp_norm(f, p) / self.hp_norm(h, p),
        }

    # Square function and Hardy norm

    def square_function(self, f: SampledFunction) -> SampledFunction:
        """S_flag f: cube part over Q(j) with psi1_j plus rectangle part over R(j, k), k < j."""
        grid = self.grid
        total = np.zeros(grid.shape)
        for j in self.window.j_values:
            tiling = cube_tiling(j, grid)
            values = convolve(self.bank.cube(j), f, at=tiling.anchor_indices(self.anchor_mode))
            total += _paint(tiling, np.asarray(values) ** 2)
        for j, k in self.window.vertical_pairs():
            tiling = vertical_tiling(j, k, grid)
            values = convolve(self.bank.flag(j, k), f, at=tiling.anchor_indices(self.anchor_mode))
            total += _paint(tiling, np.asarray(values) ** 2)
        return SampledFunction(grid, np.sqrt(total))

    def hp_norm(self, f: SampledFunction, p: float) -> float:
        """||S_flag f||_p = (sum S^p w)^(1/p) for 4n/(4n+1) < p <= 1."""
        check_hardy_exponent(p, self.grid.n)
        s = self.square_function(f).values
        total = float(np.sum(s ** p)) * self.grid.cell_volume
        return total ** (1.0 / p)


def _paint(tiling: Tiling, region_values: np.ndarray) -> np.ndarray:
    return np.asarray(region_values)[tiling.labels()]


def measure_reconstruction(transform: FlagTransform, fields: Iterable[SampledFunction],
                           N_values: Sequence[int]) -> List[Tuple[int, float, float]]:
    """(N, mean sampling error against P f, mean error against f after the global scale) per N."""
    fields = list(fields)
    limits = [transform.window_limit(f) for f in fields]
    floor = float(np.mean([transform.window_floor(f, P) for f, P in zip(fields, limits)]))
    logger.info(f"window floor ||f - s P f|| / ||f||: {floor:.4e} at s={transform.scale:.6g}")
    rows = []
    for N in N_values:
        sampled, against_f = [], []
        for f, P in zip(fields, limits):
            T = transform.synthesize(transform.analyze(f, N))
            sampled.append(l2_norm(P - T) / l2_norm(P))
            against_f.append(l2_norm(f - T * transform.scale) / l2_norm(f))
        rows.append((N, float(np.mean(sampled)), float(np.mean(against_f))))
        logger.info(f"reconstruction N={N}: sampling error {rows[-1][1]:.4e}, error against f {rows[-1][2]:.4e}")
    return rows
