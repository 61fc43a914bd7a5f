"""
Almost-Orthogonality Lab
========================

Measured decay envelopes for wavelet-wavelet products, kernel-wavelet
products, psi_j * K * psi_j' and the flag products
psi_{j,k} * K * psi_{j',k'}, plus the slope fit that turns a scan into an
achieved decay rate and the calibration file that freezes the constants.

Sups run over grid nodes outside a two-cell boundary layer.

Author: Yourl.Cloud Inc.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from .errors import AdmissibilityError, ResolutionError
from .grid import GridSpec, SampledFunction, convolve, convolve_line, l2_norm, partial_convolve_t
from .heisenberg_core import norm_arrays
from .kernels import KernelSpec, dilate_kernel, make_kernel
from .wavelets import ComponentWavelet1, ComponentWavelet2, WaveletBank, dilate_psi1

logger = logging.getLogger(__name__)

CASES = ("one_param", "flag_case_geq", "flag_case_leq", "kernel_left", "kernel_right")
BOUNDARY_LAYER = 2
MIN_DISTANCES = 4


@dataclass(frozen=True)
class EnvelopeReport:
    """sup |A| / bound for one scale tuple; normalized_sup omits the decay prefactor.

    One-parameter scans may run at fractional j (a finer scale pitch than octaves).
    """

    j: float
    k: Optional[int]
    j_p: float
    k_p: Optional[int]
    case: str
    epsilon: float
    sup_ratio: float
    normalized_sup: float
    sup_abs: float

    @property
    def distance(self) -> float:
        return abs(self.j - self.j_p)

    def row(self, slope: Optional[float] = None) -> List[Any]:
        return [self.j, "" if self.k is None else self.k, self.j_p, "" if self.k_p is None else self.k_p,
                self.case, self.epsilon, self.sup_ratio, "" if slope is None else slope]


def check_epsilon(epsilon: float) -> float:
    if not 0.0 < epsilon < 1.0:
        raise AdmissibilityError(f"epsilon={epsilon} must lie in the open interval (0, 1)")
    return epsilon


def classify_case(j: int, k: int, j_p: int, k_p: int) -> str:
    """flag_case_geq when 2(j ^ j') >= k ^ k', flag_case_leq otherwise."""
    return "flag_case_geq" if 2 * min(j, j_p) >= min(k, k_p) else "flag_case_leq"


def interior_mask(grid: GridSpec, layer: int = BOUNDARY_LAYER) -> np.ndarray:
    mask = np.zeros(grid.shape, dtype=bool)
    mask[tuple(slice(layer, s - layer) for s in grid.shape)] = True
    return mask


def _coords(grid: GridSpec) -> np.ndarray:
    return grid.node_coords().reshape(grid.shape + (grid.d,))


def one_param_bound(grid: GridSpec, j: int, j_p: int) -> np.ndarray:
    """2^-m / (2^-m + rho(g))^{2n+3}, m = j ^ j'."""
    side = 2.0 ** (-min(j, j_p))
    return side / (side + norm_arrays(_coords(grid))) ** (2 * grid.n + 3)


def flag_bound(grid: GridSpec, j: int, k: int, j_p: int, k_p: int) -> Tuple[str, np.ndarray]:
    """Product envelope of the four-case estimate, without the decay prefactor."""
    case = classify_case(j, k, j_p, k_p)
    coords = _coords(grid)
    z_abs = np.sqrt(np.sum(coords[..., :-1] ** 2, axis=-1))
    t_abs = np.abs(coords[..., -1])
    m = min(j, j_p)
    z_side = 2.0 ** (-m)
    z_factor = 2.0 ** (-m / 2.0) / (z_side + z_abs) ** (2 * grid.n + 0.5)
    if case == "flag_case_geq":
        kappa = min(k, k_p)
        t_factor = 2.0 ** (-kappa / 4.0) / (2.0 ** (-kappa) + t_abs) ** 1.25
    else:
        t_factor = 2.0 ** (-m / 2.0) / (z_side + np.sqrt(t_abs)) ** 2.5
    return case, z_factor * t_factor


def _envelope(A: SampledFunction, bound: np.ndarray, prefactor: float) -> Tuple[float, float, float]:
    mask = interior_mask(A.grid)
    magnitude = np.abs(A.values)[mask]
    normalized = float(np.max(magnitude / bound[mask]))
    return normalized / prefactor, normalized, float(np.max(magnitude))


def wavelet_pair_envelope(j: int, j_p: int, phi: ComponentWavelet1, psi: ComponentWavelet1,
                          epsilon: float = 0.5) -> EnvelopeReport:
    """|phi_j * psi_j'(g)| against 2^{-|j-j'| eps} 2^-m / (2^-m + rho)^{2n+3}."""
    check_epsilon(epsilon)
    A = convolve(dilate_psi1(j, phi), dilate_psi1(j_p, psi))
    prefactor = 2.0 ** (-abs(j - j_p) * epsilon)
    ratio, normalized, sup_abs = _envelope(A, one_param_bound(A.grid, j, j_p), prefactor)
    return EnvelopeReport(j, None, j_p, None, "one_param", epsilon, ratio, normalized, sup_abs)


def kernel_wavelet_envelope(j: int, spec: KernelSpec, psi: ComponentWavelet1, side: str = "left") -> EnvelopeReport:
    """sup_g |(D_{2^-j} K) * psi(g)| (1 + rho(g))^{2n+3}, or psi * (D_{2^-j} K) for side="right".

    Evaluated through the dilation covariance D_s(F * G) = D_s F * D_s G with
    psi taken at its reference scale j0 and s = 2^{j0}; the report carries j0 as j_p.
    There is no decay prefactor, so sup_ratio and normalized_sup coincide.
    """
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    grid = psi.grid
    j0 = psi.reference_scale
    s = 2.0 ** j0
    K = make_kernel(dilate_kernel(spec, 2.0 ** (j0 - j)), grid, strict=False)
    wavelet = dilate_psi1(j0, psi)
    A = convolve(K, wavelet) if side == "left" else convolve(wavelet, K)
    rho = norm_arrays(_coords(grid))
    weight = s ** (-grid.Q) * (1.0 + s * rho) ** (2 * grid.n + 3)
    mask = interior_mask(grid)
    value = float(np.max((np.abs(A.values) * weight)[mask]))
    logger.debug(f"kernel-wavelet envelope j={j} ({side}): {value:.4e}")
    return EnvelopeReport(j, None, j0, None, f"kernel_{side}", 0.0, value, value,
                          float(np.max(np.abs(A.values)[mask])))


def sandwich(left: SampledFunction, K: SampledFunction, right: SampledFunction) -> SampledFunction:
    return convolve(convolve(left, K), right)


def one_param_envelope(j: int, j_p: int, K: SampledFunction, psi: ComponentWavelet1,
                       epsilon: float = 0.5) -> EnvelopeReport:
    """psi_j * K * psi_j' against the one-parameter envelope."""
    check_epsilon(epsilon)
    A = sandwich(dilate_psi1(j, psi), K, dilate_psi1(j_p, psi))
    prefactor = 2.0 ** (-abs(j - j_p) * epsilon)
    ratio, normalized, sup_abs = _envelope(A, one_param_bound(A.grid, j, j_p), prefactor)
    return EnvelopeReport(j, None, j_p, None, "one_param", epsilon, ratio, normalized, sup_abs)


def flag_envelope(j: int, k: int, j_p: int, k_p: int, K: SampledFunction, bank: WaveletBank,
                  epsilon: float = 0.5) -> EnvelopeReport:
    """psi_{j,k} * K * psi_{j',k'} against the case-appropriate product envelope."""
    check_epsilon(epsilon)
    A = sandwich(bank.flag(j, k), K, bank.flag(j_p, k_p))
    case, bound = flag_bound(A.grid, j, k, j_p, k_p)
    prefactor = 2.0 ** (-abs(j - j_p) * epsilon) * 2.0 ** (-abs(k - k_p))
    ratio, normalized, sup_abs = _envelope(A, bound, prefactor)
    return EnvelopeReport(j, k, j_p, k_p, case, epsilon, ratio, normalized, sup_abs)


def line_envelope(k: int, k_p: int, psi2: ComponentWavelet2) -> float:
    """sup_t |psi_k * psi_k'(t)| / (2^{-|k-k'|} 2^-kappa / (2^-kappa + |t|)^2), kappa = k ^ k'."""
    A = convolve_line(psi2.profile(k), psi2.profile(k_p))
    t = np.abs(A.axis)
    kappa = 2.0 ** (-min(k, k_p))
    bound = 2.0 ** (-abs(k - k_p)) * kappa / (kappa + t) ** 2
    inner = slice(BOUNDARY_LAYER, t.size - BOUNDARY_LAYER)
    return float(np.max(np.abs(A.values[inner]) / bound[inner]))


def factorization_residual(j: int, k: int, j_p: int, k_p: int, K: SampledFunction, bank: WaveletBank) -> float:
    """Relative L2 gap between psi_{j,k} * K * psi_{j',k'} and (psi_j * K * psi_j') *_2 (psi_k * psi_k')."""
    direct = sandwich(bank.flag(j, k), K, bank.flag(j_p, k_p))
    one_param = sandwich(bank.cube(j), K, bank.cube(j_p))
    factored = partial_convolve_t(one_param, convolve_line(bank.line(k), bank.line(k_p)))
    scale = l2_norm(direct)
    return l2_norm(direct - factored) / scale if scale > 0 else 0.0


def _fit_points(scan: Sequence[EnvelopeReport]) -> Tuple[np.ndarray, np.ndarray]:
    points = sorted((r.distance, r.normalized_sup) for r in scan if r.normalized_sup > 0)
    distances = np.array([p[0] for p in points], dtype=float)
    if len(set(distances.tolist())) < MIN_DISTANCES:
        raise ResolutionError(
            f"slope fit needs at least {MIN_DISTANCES} distinct |j-j'| values, scan has {sorted(set(distances.tolist()))}"
        )
    return distances, np.log(np.array([p[1] for p in points]))


def decay_slope(scan: Sequence[EnvelopeReport]) -> float:
    """Least-squares slope of log(normalized sup) against |j - j'|."""
    distances, logs = _fit_points(scan)
    return float(stats.linregress(distances, logs).slope)


def fit_epsilon(scan: Sequence[EnvelopeReport]) -> float:
    """eps_hat = -slope / ln 2, clamped to [0, 1]."""
    eps = -decay_slope(scan) / math.log(2.0)
    return min(max(eps, 0.0), 1.0)


def one_param_scan(scales: Sequence[float], K: SampledFunction, psi: ComponentWavelet1,
                   epsilon: float = 0.5) -> List[EnvelopeReport]:
    reports = []
    for j in scales:
        for j_p in scales:
            report = one_param_envelope(j, j_p, K, psi, epsilon)
            logger.debug(f"one-param ({j}, {j_p}): sup ratio {report.sup_ratio:.4e}")
            reports.append(report)
    return reports


@dataclass
class Calibration:
    """Frozen constants from a calibration run, compared against by later runs."""

    constants: Dict[str, float] = field(default_factory=dict)
    grid: Dict[str, Any] = field(default_factory=dict)
    version: int = 1

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Calibration":
        with open(path) as handle:
            data = json.load(handle)
        return cls(constants={k: float(v) for k, v in data.get("constants", {}).items()},
                   grid=data.get("grid", {}), version=int(data.get("version", 1)))

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as handle:
            json.dump(asdict(self), handle, indent=2, sort_keys=True)
            handle.write("\n")
        logger.info(f"Saved calibration constants to {path}")
        return path

    def get(self, name: str) -> Optional[float]:
        return self.constants.get(name)

    def matches(self, grid: GridSpec) -> bool:
        return not self.grid or self.grid == grid.to_dict()
