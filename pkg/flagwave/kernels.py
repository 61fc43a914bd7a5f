"""
Truncated Homogeneous Kernels
=============================

Calderon-Zygmund kernels of homogeneity -(2n+2) on H^n, built from odd
analytic profiles in the smooth gauge and truncated by C-infinity cutoffs,
together with their size/smoothness certificates, the pairing against
dilated normalized bumps, and the convolution operator T f = f * K.

Author: Yourl.Cloud Inc.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatchError, ResolutionError
from .grid import GridSpec, SampledFunction, convolve, l2_norm
from .heisenberg_core import dilate_arrays, norm_arrays, smooth_gauge_arrays
from .wavelets import bump, smooth_step

logger = logging.getLogger(__name__)

PROFILES = ("riesz_x1", "riesz_y1", "central_t", "custom")


@dataclass(frozen=True)
class KernelSpec:
    """Profile, cut radii (smooth gauge) and amplitude of a truncated kernel."""

    profile: str = "riesz_x1"
    inner_cut: float = 0.5
    outer_cut: float = 2.0
    n: int = 1
    amplitude: float = 1.0
    custom: Optional[SampledFunction] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ValueError(f"unknown kernel profile {self.profile!r}; expected one of {PROFILES}")
        if not 0 < self.inner_cut < self.outer_cut:
            raise ResolutionError(
                f"kernel cuts need 0 < eps_in < R_out, got eps_in={self.inner_cut}, R_out={self.outer_cut}"
            )
        if self.profile == "custom" and self.custom is None:
            raise ValueError("the custom profile needs sampled values")

    @classmethod
    def default_for(cls, grid: GridSpec, profile: str = "riesz_x1", **kwargs) -> "KernelSpec":
        """eps_in = h_z and R_out = min(5 h_z, reach): pass band [2 h_z, 2.5 h_z], room for one octave of dilation."""
        return cls(profile=profile, inner_cut=grid.h_z, outer_cut=min(5.0 * grid.h_z, kernel_reach(grid)),
                   n=grid.n, **kwargs)

    @property
    def odd_axis(self) -> Optional[int]:
        """Coordinate whose negation flips the sign of the profile."""
        return {"riesz_x1": 0, "riesz_y1": self.n, "central_t": 2 * self.n}.get(self.profile)

    @property
    def pass_band(self) -> Tuple[float, float]:
        return 2.0 * self.inner_cut, self.outer_cut / 2.0

    def scaled(self, factor: float) -> "KernelSpec":
        return replace(self, amplitude=self.amplitude * factor)


def profile_values(spec: KernelSpec, coords: np.ndarray) -> np.ndarray:
    """Untruncated analytic profile at points (..., 2n+1)."""
    coords = np.asarray(coords, dtype=float)
    if coords.shape[-1] != 2 * spec.n + 1:
        raise DimensionMismatchError(f"kernel for n={spec.n} evaluated on {coords.shape[-1]} coordinates")
    rho = smooth_gauge_arrays(coords)
    safe = np.where(rho > 0, rho, 1.0)
    n = spec.n
    if spec.profile == "riesz_x1":
        values = coords[..., 0] / safe ** (2 * n + 3)
    elif spec.profile == "riesz_y1":
        values = coords[..., n] / safe ** (2 * n + 3)
    elif spec.profile == "central_t":
        values = coords[..., 2 * n] / safe ** (2 * n + 4)
    else:
        raise ValueError("the custom profile has no analytic form")
    return np.where(rho > 0, values, 0.0)


def cutoff(spec: KernelSpec, rho: np.ndarray) -> np.ndarray:
    """Zero below eps_in and above R_out, one on [2 eps_in, R_out / 2]."""
    eps, big = spec.inner_cut, spec.outer_cut
    return smooth_step((rho - eps) / eps) * smooth_step((big - rho) / (big / 2.0))


def kernel_values(spec: KernelSpec, coords: np.ndarray) -> np.ndarray:
    coords = np.asarray(coords, dtype=float)
    return spec.amplitude * profile_values(spec, coords) * cutoff(spec, smooth_gauge_arrays(coords))


def kernel_reach(grid: GridSpec) -> float:
    """Largest smooth-gauge radius whose ball stays inside the box."""
    return min(grid.half_width_z, math.sqrt(grid.half_width_t))


def cut_problem(spec: KernelSpec, grid: GridSpec) -> Optional[str]:
    if spec.inner_cut < grid.h_z:
        return f"inner cut {spec.inner_cut:g} is below one z-cell ({grid.h_z:g})"
    reach = kernel_reach(grid)
    if spec.outer_cut > reach:
        return f"outer cut {spec.outer_cut:g} leaves the box (reach {reach:g})"
    return None


def make_kernel(spec: KernelSpec, grid: GridSpec, strict: bool = True) -> SampledFunction:
    """Sample the truncated kernel; with strict=False unresolvable cuts only warn."""
    if spec.n != grid.n:
        raise DimensionMismatchError(f"kernel for n={spec.n} on a grid with n={grid.n}")
    problem = cut_problem(spec, grid)
    if problem is not None:
        if strict:
            raise ResolutionError(f"kernel cuts not resolvable: {problem}")
        logger.warning(f"Sampling kernel with unresolved cuts: {problem}")
    if spec.profile == "custom":
        if spec.custom.grid != grid:
            raise ResolutionError("custom kernel samples live on a different grid")
        rho = smooth_gauge_arrays(grid.node_coords()).reshape(grid.shape)
        return SampledFunction(grid, spec.amplitude * spec.custom.values * cutoff(spec, rho))
    values = kernel_values(spec, grid.node_coords()).reshape(grid.shape)
    return SampledFunction(grid, values)


def dilate_kernel(spec: KernelSpec, r: float) -> KernelSpec:
    """D_r K(g) = r^Q K(delta_r g): for homogeneous profiles only the cuts move, by 1/r."""
    if not r > 0:
        raise ValueError(f"dilation factor must be positive, got {r}")
    if spec.profile == "custom":
        raise ValueError("custom kernels are dilated by resampling, not analytically")
    return replace(spec, inner_cut=spec.inner_cut / r, outer_cut=spec.outer_cut / r)


def apply(K: SampledFunction, f: SampledFunction, spec: Optional[KernelSpec] = None) -> SampledFunction:
    """T f = f * K."""
    if spec is not None:
        logger.debug(f"apply {spec.profile}: eps_in={spec.inner_cut:g}, R_out={spec.outer_cut:g}")
    return convolve(f, K)


@dataclass(frozen=True)
class KernelCertificate:
    C0: float
    C1: float
    C2: float
    eps_in: float
    R_out: float
    profile: str

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def verify_size_smoothness(K: SampledFunction, spec: KernelSpec) -> KernelCertificate:
    """Suprema of rho^{Q}|K|, rho^{Q+1}|grad_z K| and rho^{Q+2}|d_t K| over the pass band."""
    grid = K.grid
    coords = grid.node_coords().reshape(grid.shape + (grid.d,))
    rho = norm_arrays(coords)
    rho_bar = smooth_gauge_arrays(coords)
    lo, hi = spec.pass_band
    band = (rho_bar >= lo) & (rho_bar <= hi)
    if not np.any(band):
        logger.warning(f"Empty pass band [{lo:g}, {hi:g}] on this grid; certificate is zero")
        return KernelCertificate(0.0, 0.0, 0.0, spec.inner_cut, spec.outer_cut, spec.profile)
    values = np.asarray(K.values, dtype=float)
    q = grid.Q
    grads = [np.gradient(values, grid.h_z, axis=a, edge_order=2) for a in range(2 * grid.n)]
    grad_z = np.sqrt(sum(g ** 2 for g in grads))
    d_t = np.gradient(values, grid.h_t, axis=grid.d - 1, edge_order=2)
    c0 = float(np.max((rho ** q * np.abs(values))[band]))
    c1 = float(np.max((rho ** (q + 1) * grad_z)[band]))
    c2 = float(np.max((rho ** (q + 2) * np.abs(d_t))[band]))
    return KernelCertificate(c0, c1, c2, spec.inner_cut, spec.outer_cut, spec.profile)


def kernel_certificate_json(cert: KernelCertificate, path=None) -> str:
    text = cert.to_json()
    if path is not None:
        with open(path, "w") as handle:
            handle.write(text + "\n")
    return text


@dataclass(frozen=True)
class BumpFunction:
    """phi(g) = c * B(w) * (1 + <tilt, w>), w = delta_{1/s}(g - center), supported in the unit rho-ball."""

    center: Tuple[float, ...]
    radius: float = 0.6
    tilt: Tuple[float, ...] = ()
    amplitude: float = 1.0

    @property
    def d(self) -> int:
        return len(self.center)

    def evaluate(self, coords: np.ndarray) -> np.ndarray:
        coords = np.asarray(coords, dtype=float)
        scale = np.full(self.d, self.radius)
        scale[-1] = self.radius ** 2
        w = (coords - np.asarray(self.center)) / scale
        values = bump(smooth_gauge_arrays(w))
        if self.tilt:
            values = values * (1.0 + w @ np.asarray(self.tilt))
        return self.amplitude * values

    def dilated(self, grid: GridSpec, r: float) -> SampledFunction:
        """phi^r(g) = phi(delta_r g) sampled on the grid."""
        return SampledFunction(grid, self.evaluate(dilate_arrays(r, grid.node_coords())).reshape(grid.shape))

    def normalized(self, max_order: int = 1, points: int = 48) -> "BumpFunction":
        """Rescale so every discrete partial of order <= max_order is bounded by 1."""
        n = (self.d - 1) // 2
        ref = GridSpec(n=n, half_width_z=1.0, half_width_t=1.0, points_per_z_axis=points, points_per_t_axis=points)
        values = self.evaluate(ref.node_coords()).reshape(ref.shape) / self.amplitude
        worst = float(np.max(np.abs(values)))
        layer = [values]
        for _ in range(max_order):
            nxt = []
            for v in layer:
                for a in range(ref.d):
                    g = np.gradient(v, ref.steps[a], axis=a, edge_order=2)
                    worst = max(worst, float(np.max(np.abs(g))))
                    nxt.append(g)
            layer = nxt
        return replace(self, amplitude=1.0 / worst)


def bump_family(n: int, size: int, seed: int, max_order: int = 1) -> List[BumpFunction]:
    """One centred even bump followed by shifted, tilted bumps, all inside the unit rho-ball."""
    rng = np.random.default_rng(seed)
    d = 2 * n + 1
    family = [BumpFunction(center=(0.0,) * d).normalized(max_order)]
    for _ in range(size - 1):
        shift = np.concatenate([rng.uniform(-0.3, 0.3, size=2 * n) / math.sqrt(2 * n), rng.uniform(-0.1, 0.1, size=1)])
        tilt = rng.uniform(-0.5, 0.5, size=d)
        family.append(BumpFunction(center=tuple(shift), tilt=tuple(tilt)).normalized(max_order))
    return family


@dataclass
class CancellationReport:
    max_pairing: float
    per_radius: Dict[float, float]
    skipped: List[float]

    @property
    def coverage(self) -> float:
        tested = len(self.per_radius)
        return tested / (tested + len(self.skipped)) if tested + len(self.skipped) else 0.0

    @property
    def variation(self) -> float:
        values = [v for v in self.per_radius.values() if v > 0]
        return max(values) / min(values) if values else 1.0


def bump_problem(grid: GridSpec, r: float) -> Optional[str]:
    reach = 1.0 / r
    if reach < 2.0 * grid.h_z or reach * reach < 2.0 * grid.h_t:
        return f"dilated bump of radius {reach:g} is below two cells"
    if reach > grid.half_width_z or reach * reach > grid.half_width_t:
        return f"dilated bump of radius {reach:g} leaves the box"
    return None


def bump_cancellation_test(K: SampledFunction, family: Sequence[BumpFunction],
                           r_list: Sequence[float]) -> CancellationReport:
    """max over the family of |<K, phi^r>| for every resolvable r."""
    grid = K.grid
    per_radius: Dict[float, float] = {}
    skipped: List[float] = []
    for r in r_list:
        problem = bump_problem(grid, r)
        if problem is not None:
            logger.warning(f"Skipping r={r:g}: {problem}")
            skipped.append(r)
            continue
        pairings = [abs(float(np.sum(K.values * phi.dilated(grid, r).values)) * grid.cell_volume)
                    for phi in family]
        per_radius[r] = max(pairings)
    best = max(per_radius.values()) if per_radius else 0.0
    logger.info(f"bump cancellation: max pairing {best:.4e}, covered {len(per_radius)}/{len(r_list)} radii")
    return CancellationReport(best, per_radius, skipped)


def operator_norm_estimate(K: SampledFunction, fields: Sequence[SampledFunction]) -> List[float]:
    """||f * K||_2 / ||f||_2 for every field of the family."""
    return [l2_norm(apply(K, f)) / l2_norm(f) for f in fields]
