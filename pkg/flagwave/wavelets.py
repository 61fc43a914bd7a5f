"""
Component and Flag Wavelets
===========================

psi1 lives on H^n: a C-infinity bump in the smooth gauge times a least-norm
polynomial multiplier that kills every moment z^a u^b with |a| + 2b <= M at
quadrature level. psi2 lives on R: band-limited to 1/2 <= |eta| <= 2 with a
partition-of-unity square root, so sum_k |psi2_hat(2^-k eta)|^2 = 1
structurally. The flag wavelet is psi_{j,k} = psi1_j *_2 psi2_k.

Dilates are sampled directly from the analytic recipe at each scale, so
moments vanish on the grid at every scale and only resolvable scales are
accepted.

Author: Yourl.Cloud Inc.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .errors import ResolutionError
from .grid import (
    GridSpec,
    Sampled1DFunction,
    SampledFunction,
    partial_convolve_t,
    reflect,
    reflect_line,
    save,
)
from .heisenberg_core import MultiIndex, apply_multi_index, multi_indices, smooth_gauge_arrays

logger = logging.getLogger(__name__)

SCALE_SEARCH = range(-24, 25)


def smooth_step(x: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)
    a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
    b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return a / (a + b)


def bump(s: np.ndarray) -> np.ndarray:
    """exp(-1/(1 - s^2)) on |s| < 1, zero elsewhere."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


def _monomials(points: np.ndarray, exponents: Sequence[MultiIndex]) -> np.ndarray:
    cols = [np.prod(points ** np.asarray(m.i, dtype=float), axis=-1) for m in exponents]
    return np.stack(cols, axis=-1)


@dataclass(frozen=True)
class WaveletSpec:
    """Moment order M, support radius r0 of psi1 at scale 0, and dimension n."""

    M: int = 4
    support_radius: float = 0.25
    n: int = 1
    min_cells_z: int = 8
    min_cells_t: int = 4

    def __post_init__(self):
        if self.M < 0:
            raise ValueError(f"moment order must be nonnegative, got {self.M}")
        if not self.support_radius > 0:
            raise ValueError(f"support radius must be positive, got {self.support_radius}")

    @property
    def witness_degree(self) -> int:
        return 2 * ((self.M + 2) // 2)

    def radius(self, j: int) -> float:
        return self.support_radius * 2.0 ** (-j)


def psi1_scale_problem(spec: WaveletSpec, grid: GridSpec, j: int) -> Optional[str]:
    """Why scale j cannot carry psi1 on this grid, or None when it can."""
    r = spec.radius(j)
    if 2.0 * r / grid.h_z < spec.min_cells_z:
        return f"z-support {2 * r:g} spans fewer than {spec.min_cells_z} cells of {grid.h_z:g}"
    if 2.0 * r * r / grid.h_t < spec.min_cells_t:
        return f"t-support {2 * r * r:g} spans fewer than {spec.min_cells_t} cells of {grid.h_t:g}"
    if r > grid.half_width_z / 2.0 or r * r > grid.half_width_t / 2.0:
        return f"support radius {r:g} overflows half the box"
    return None


def valid_psi1_scales(spec: WaveletSpec, grid: GridSpec) -> List[int]:
    return [j for j in SCALE_SEARCH if psi1_scale_problem(spec, grid, j) is None]


class ComponentWavelet1:
    """psi1 = amplitude * r^-Q * p(w) B(w), w = delta_{1/r}(g), solved per scale on the grid."""

    def __init__(self, spec: WaveletSpec, grid: GridSpec, mean_zero: bool = True):
        if spec.n != grid.n:
            raise ResolutionError(f"wavelet spec is for n={spec.n} but grid has n={grid.n}")
        self.spec = spec
        self.grid = grid
        self.mean_zero = mean_zero
        scales = valid_psi1_scales(spec, grid)
        if not scales:
            reason = psi1_scale_problem(spec, grid, 0)
            raise ResolutionError(f"no scale of psi1 (r0={spec.support_radius}) is resolvable: {reason}")
        self.valid_scales = scales
        self.reference_scale = min(scales, key=lambda j: (abs(j), j))
        self.amplitude = 1.0
        self.condition_numbers: Dict[int, float] = {}
        self._cache: Dict[int, SampledFunction] = {}

        raw = self._solve(self.reference_scale)
        ref_norm = math.sqrt(float(np.sum(raw ** 2)) * grid.cell_volume)
        # unit L2 norm at scale 0; ||D_r psi||_2 = r^{Q/2} ||psi||_2
        self.amplitude = 2.0 ** (self.reference_scale * grid.Q / 2.0) / ref_norm
        self._cache[self.reference_scale] = SampledFunction(grid, raw * self.amplitude)
        logger.info(
            f"Built psi1 (M={spec.M}, r0={spec.support_radius}, mean_zero={mean_zero}); "
            f"reference scale j={self.reference_scale}, resolvable j in {scales[0]}..{scales[-1]}"
        )

    @property
    def samples(self) -> SampledFunction:
        return self._cache[self.reference_scale]

    @property
    def constraint_indices(self) -> List[MultiIndex]:
        return list(multi_indices(self.grid.n, self.spec.M)) if self.mean_zero else []

    def profile(self, j: int) -> SampledFunction:
        if j not in self._cache:
            self._cache[j] = SampledFunction(self.grid, self._solve(j) * self.amplitude)
        return self._cache[j]

    def _solve(self, j: int) -> np.ndarray:
        problem = psi1_scale_problem(self.spec, self.grid, j)
        if problem is not None:
            raise ResolutionError(f"psi1 at scale j={j} is not representable: {problem}")
        grid = self.grid
        r = self.spec.radius(j)
        coords = grid.node_coords()
        scaled = coords / np.concatenate([np.full(2 * grid.n, r), [r * r]])
        weights = bump(smooth_gauge_arrays(scaled))
        support = np.flatnonzero(weights)
        w_pts = scaled[support]
        b = weights[support] * (grid.cell_volume / r ** grid.Q)

        if self.mean_zero:
            unknowns = list(multi_indices(grid.n, self.spec.M + 2))
            basis = _monomials(w_pts, unknowns)
            rows = (_monomials(w_pts, self.constraint_indices) * b[:, None]).T @ basis
            witness = (np.sum(w_pts[:, :-1] ** 2, axis=-1) ** (self.spec.witness_degree // 2)) * b
            system = np.vstack([rows, witness @ basis])
            rhs = np.zeros(system.shape[0])
            rhs[-1] = 1.0
            singular = linalg.svdvals(system)
            cond = float(singular[0] / singular[-1]) if singular[-1] > 0 else math.inf
            self.condition_numbers[j] = cond
            if not singular[-1] > 1e-12 * singular[0]:
                raise ResolutionError(
                    f"moment Gram matrix for psi1 at scale j={j} is singular (condition number {cond:.3e})"
                )
            coeffs = linalg.lstsq(system, rhs)[0]
            profile = (basis @ coeffs) * weights[support]
        else:
            profile = weights[support]

        values = np.zeros(grid.size)
        values[support] = profile * r ** (-grid.Q)
        return values.reshape(grid.shape)

    def moment_residuals(self, j: Optional[int] = None) -> List[Tuple[MultiIndex, float]]:
        """Relative quadrature moments |int g^I psi| / int |g^I psi| for every killed monomial."""
        psi = self.profile(self.reference_scale if j is None else j)
        coords = self.grid.node_coords()
        values = psi.values.ravel()
        support = np.flatnonzero(values)
        out = []
        for index in multi_indices(self.grid.n, self.spec.M):
            mono = _monomials(coords[support], [index])[:, 0]
            terms = mono * values[support]
            scale = float(np.sum(np.abs(terms)))
            out.append((index, abs(float(np.sum(terms))) / scale if scale > 0 else 0.0))
        return out


def build_psi1(spec: WaveletSpec, grid: GridSpec) -> ComponentWavelet1:
    return ComponentWavelet1(spec, grid)


def build_control_bump(spec: WaveletSpec, grid: GridSpec) -> ComponentWavelet1:
    """Same bump with no moment projection: the non-mean-zero negative control."""
    return ComponentWavelet1(spec, grid, mean_zero=False)


def dilate_psi1(j: int, psi: ComponentWavelet1) -> SampledFunction:
    """D_{2^j} psi1."""
    return psi.profile(j)


def derivative_bounds(psi: ComponentWavelet1, j: Optional[int] = None) -> float:
    """max over |I| <= 2 of sup|X^I psi_j| * r_j^{d(I)} / sup|psi_j|."""
    j = psi.reference_scale if j is None else j
    f = psi.profile(j)
    r = psi.spec.radius(j)
    peak = float(np.max(np.abs(f.values)))
    d = psi.grid.d
    worst = 0.0
    for order in (1, 2):
        for combo in _combinations(d, order):
            index = MultiIndex(combo)
            deriv = apply_multi_index(index, f)
            worst = max(worst, float(np.max(np.abs(deriv.values))) * r ** index.degree / peak)
    return worst


def _combinations(d: int, order: int):
    seen = set()
    for a in range(d):
        for b in range(d):
            combo = [0] * d
            combo[a] += 1
            if order == 2:
                combo[b] += 1
            key = tuple(combo)
            if key not in seen:
                seen.add(key)
                yield key


# psi2 on the central axis

def psi2_transfer(eta: np.ndarray) -> np.ndarray:
    """psi2_hat(eta) = sqrt(L(s) - L(s - 1)), s = log2|eta|, L(s) = smooth_step(s + 1)."""
    eta = np.abs(np.asarray(eta, dtype=float))
    out = np.zeros_like(eta)
    band = (eta >= 0.5) & (eta <= 2.0)
    s = np.log2(eta[band])
    out[band] = np.sqrt(np.clip(smooth_step(s + 1.0) - smooth_step(s), 0.0, None))
    return out


def calderon_sum(eta: np.ndarray, scales: Sequence[int]) -> np.ndarray:
    """sum_k |psi2_hat(2^-k eta)|^2 over the given scales."""
    eta = np.asarray(eta, dtype=float)
    return sum(psi2_transfer(eta * 2.0 ** (-k)) ** 2 for k in scales)


def psi2_scale_problem(grid: GridSpec, k: int) -> Optional[str]:
    nyquist = 0.5 / grid.h_t
    if 2.0 ** (k + 1) > nyquist:
        return f"band edge {2.0 ** (k + 1):g} exceeds the t-Nyquist frequency {nyquist:g}"
    if 2.0 ** (-k) > grid.half_width_t / 2.0:
        return f"width {2.0 ** (-k):g} exceeds half the t-box"
    return None


def valid_psi2_scales(grid: GridSpec) -> List[int]:
    return [k for k in SCALE_SEARCH if psi2_scale_problem(grid, k) is None]


class ComponentWavelet2:
    """Band-limited even profile on the t-axis with moments up to M2 killed on the grid."""

    def __init__(self, M2: int, grid: GridSpec):
        if M2 < 1:
            raise ValueError(f"psi2 moment order must be >= 1, got {M2}")
        scales = valid_psi2_scales(grid)
        if not scales:
            raise ResolutionError(f"psi2 band is not resolvable on the t-grid: {psi2_scale_problem(grid, 0)}")
        self.M2 = M2
        self.grid = grid
        self.valid_scales = scales
        self.reference_scale = min(scales, key=lambda k: (abs(k), k))
        self._cache: Dict[int, Sampled1DFunction] = {}
        logger.info(f"Built psi2 (M2={M2}); resolvable k in {scales[0]}..{scales[-1]}")

    @property
    def samples(self) -> Sampled1DFunction:
        return self.profile(self.reference_scale)

    def transfer(self, eta: np.ndarray) -> np.ndarray:
        return psi2_transfer(eta)

    def profile(self, k: int) -> Sampled1DFunction:
        if k not in self._cache:
            self._cache[k] = self._sample(k)
        return self._cache[k]

    def _sample(self, k: int) -> Sampled1DFunction:
        problem = psi2_scale_problem(self.grid, k)
        if problem is not None:
            raise ResolutionError(f"psi2 at scale k={k} is not representable: {problem}")
        grid = self.grid
        v = grid.axis(grid.d - 1)
        lo, hi = 2.0 ** (k - 1), 2.0 ** (k + 1)
        # psi_k(v) = 2 int psi_hat(2^-k eta) cos(2 pi eta v) d eta over the band
        count = 256 + int(8.0 * math.pi * (hi - lo) * grid.half_width_t)
        nodes, weights = np.polynomial.legendre.leggauss(count)
        eta = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
        weights = 0.5 * (hi - lo) * weights * psi2_transfer(eta * 2.0 ** (-k))
        values = 2.0 * (np.cos(2.0 * math.pi * np.outer(v, eta)) @ weights)

        half = grid.half_width_t
        taper = 1.0 - smooth_step((np.abs(v) - 0.6 * half) / (0.3 * half))
        values = values * taper
        values = self._kill_moments(values, v, taper)
        symmetric = reflect_line(Sampled1DFunction(grid, values)).values
        return Sampled1DFunction(grid, 0.5 * (values + symmetric))

    def _kill_moments(self, values: np.ndarray, v: np.ndarray, taper: np.ndarray) -> np.ndarray:
        powers = list(range(0, self.M2 + 1, 2))
        basis = np.stack([taper * v ** p for p in powers], axis=-1)
        gram = np.stack([v ** p for p in powers], axis=0) @ basis
        moments = np.stack([v ** p for p in powers], axis=0) @ values
        coeffs = linalg.solve(gram, moments)
        return values - basis @ coeffs

    def moment_residuals(self, k: Optional[int] = None) -> List[Tuple[int, float]]:
        w = self.profile(self.reference_scale if k is None else k)
        v = w.axis
        out = []
        for gamma in range(self.M2 + 1):
            terms = v ** gamma * w.values
            scale = float(np.sum(np.abs(terms)))
            out.append((gamma, abs(float(np.sum(terms))) / scale if scale > 0 else 0.0))
        return out

    def sampled_calderon_sum(self, scales: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
        """Calderon sum rebuilt from the samples' DFT on the positive grid frequencies."""
        grid = self.grid
        v = grid.axis(grid.d - 1)
        eta = np.arange(1, grid.points_per_t_axis // 2) / (2.0 * grid.half_width_t)
        total = np.zeros_like(eta)
        for k in scales:
            w = self.profile(k)
            spectrum = np.cos(2.0 * math.pi * np.outer(eta, v)) @ w.values * grid.h_t
            total += spectrum ** 2
        return eta, total


def build_psi2(M2: int, grid: GridSpec) -> ComponentWavelet2:
    return ComponentWavelet2(M2, grid)


def dilate_psi2(k: int, psi: ComponentWavelet2) -> Sampled1DFunction:
    """2^k psi2(2^k u)."""
    return psi.profile(k)


@dataclass(frozen=True)
class FlagWavelet:
    j: int
    k: int
    samples: SampledFunction


def flag_wavelet(j: int, k: int, psi1: ComponentWavelet1, psi2: ComponentWavelet2) -> FlagWavelet:
    return FlagWavelet(j, k, partial_convolve_t(dilate_psi1(j, psi1), dilate_psi2(k, psi2)))


@dataclass
class WaveletBank:
    """Caches every dilate, flag wavelet and reflected flag wavelet a run touches."""

    psi1: ComponentWavelet1
    psi2: ComponentWavelet2
    _flags: Dict[Tuple[int, int], FlagWavelet] = field(default_factory=dict, repr=False)
    _reflected: Dict[Tuple[int, int], SampledFunction] = field(default_factory=dict, repr=False)
    _reflected_cubes: Dict[int, SampledFunction] = field(default_factory=dict, repr=False)

    @classmethod
    def build(cls, spec: WaveletSpec, M2: int, grid: GridSpec) -> "WaveletBank":
        return cls(build_psi1(spec, grid), build_psi2(M2, grid))

    @property
    def grid(self) -> GridSpec:
        return self.psi1.grid

    def cube(self, j: int) -> SampledFunction:
        return dilate_psi1(j, self.psi1)

    def cube_reflected(self, j: int) -> SampledFunction:
        if j not in self._reflected_cubes:
            self._reflected_cubes[j] = reflect(self.cube(j))
        return self._reflected_cubes[j]

    def line(self, k: int) -> Sampled1DFunction:
        return dilate_psi2(k, self.psi2)

    def flag(self, j: int, k: int) -> SampledFunction:
        if (j, k) not in self._flags:
            self._flags[(j, k)] = flag_wavelet(j, k, self.psi1, self.psi2)
            logger.debug(f"Cached flag wavelet ({j}, {k})")
        return self._flags[(j, k)].samples

    def flag_reflected(self, j: int, k: int) -> SampledFunction:
        if (j, k) not in self._reflected:
            self._reflected[(j, k)] = reflect(self.flag(j, k))
        return self._reflected[(j, k)]

    def check_window(self, j_values: Sequence[int], k_values: Sequence[int]):
        bad_j = [j for j in j_values if j not in self.psi1.valid_scales]
        bad_k = [k for k in k_values if k not in self.psi2.valid_scales]
        if bad_j or bad_k:
            raise ResolutionError(
                f"scale window not resolvable: j {bad_j} (valid {self.psi1.valid_scales}), "
                f"k {bad_k} (valid {self.psi2.valid_scales})"
            )


def save_wavelet(path, samples, spec: Optional[WaveletSpec] = None, j: Optional[int] = None,
                 k: Optional[int] = None) -> Path:
    meta = {"j": j, "k": k}
    if spec is not None:
        meta.update({"M": spec.M, "r0": spec.support_radius})
    return save(samples, path, metadata=meta)
