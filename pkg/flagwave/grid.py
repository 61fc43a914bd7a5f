"""
Sampled Functions on the Heisenberg Box Grid
============================================

Uniform node grids over boxes [-L_z, L_z)^{2n} x [-L_t, L_t), sampled
functions with rectangle-rule quadrature, reflection, L^1-normalised
dilation, the Heisenberg group convolution and the partial convolution in
the central variable, plus the binary container used to ship fields around.

Nodes sit at -L + i*h, so the origin is a node and differences of nodes are
nodes. Off-grid values come from multilinear interpolation with zero
extension outside the box.

Author: Yourl.Cloud Inc.
"""

from __future__ import annotations

import json
import logging
import math
import struct
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import ndimage

from . import _kernels
from .errors import DimensionMismatchError, GridMismatchError
from .heisenberg_core import dilate_arrays, multiply_arrays, smooth_gauge_arrays

logger = logging.getLogger(__name__)

CONTAINER_MAGIC = b"FLGW"
CONTAINER_VERSION = 1
_HEADER = struct.Struct("<4sIIIIIdd")


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid over [-L_z, L_z)^{2n} x [-L_t, L_t)."""

    n: int = 1
    half_width_z: float = 4.0
    half_width_t: float = 16.0
    points_per_z_axis: int = 32
    points_per_t_axis: int = 64

    def __post_init__(self):
        if self.n < 1:
            raise DimensionMismatchError(f"n must be positive, got {self.n}")
        if not (self.half_width_z > 0 and self.half_width_t > 0):
            raise ValueError("grid half-widths must be positive")
        for name in ("points_per_z_axis", "points_per_t_axis"):
            count = getattr(self, name)
            if count < 2 or count % 2:
                raise ValueError(f"{name} must be an even integer >= 2, got {count}")

    @property
    def d(self) -> int:
        return 2 * self.n + 1

    @property
    def Q(self) -> int:
        return 2 * self.n + 2

    @property
    def h_z(self) -> float:
        return 2.0 * self.half_width_z / self.points_per_z_axis

    @property
    def h_t(self) -> float:
        return 2.0 * self.half_width_t / self.points_per_t_axis

    @property
    def cell_volume(self) -> float:
        return self.h_z ** (2 * self.n) * self.h_t

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.points_per_z_axis,) * (2 * self.n) + (self.points_per_t_axis,)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def lower(self) -> np.ndarray:
        lo = np.full(self.d, -self.half_width_z)
        lo[-1] = -self.half_width_t
        return lo

    @property
    def steps(self) -> np.ndarray:
        step = np.full(self.d, self.h_z)
        step[-1] = self.h_t
        return step

    @property
    def box_volume(self) -> float:
        return (2.0 * self.half_width_z) ** (2 * self.n) * 2.0 * self.half_width_t

    @property
    def twist_aligned(self) -> bool:
        """True when every product of two nodes lands on a node (2 h_z^2 / h_t integral)."""
        ratio = 2.0 * self.h_z * self.h_z / self.h_t
        return abs(ratio - round(ratio)) < 1e-12 and round(ratio) >= 1

    def axis(self, k: int) -> np.ndarray:
        count = self.shape[k]
        return self.lower[k] + np.arange(count) * self.steps[k]

    def coordinate(self, k: int) -> np.ndarray:
        """Coordinate k shaped to broadcast against a values array."""
        shape = [1] * self.d
        shape[k] = self.shape[k]
        return self.axis(k).reshape(shape)

    def node_coords(self, flat_indices: Optional[np.ndarray] = None) -> np.ndarray:
        if flat_indices is None:
            flat_indices = np.arange(self.size)
        multi = np.unravel_index(np.asarray(flat_indices, dtype=np.int64), self.shape)
        return np.stack([self.lower[k] + multi[k] * self.steps[k] for k in range(self.d)], axis=-1)

    def nearest_index(self, coord: float, k: int) -> int:
        i = int(math.floor((coord - self.lower[k]) / self.steps[k] + 0.5))
        return min(max(i, 0), self.shape[k] - 1)

    def refine(self, factor: int) -> "GridSpec":
        if factor < 1:
            raise ValueError(f"refinement factor must be >= 1, got {factor}")
        return GridSpec(
            n=self.n,
            half_width_z=self.half_width_z,
            half_width_t=self.half_width_t,
            points_per_z_axis=self.points_per_z_axis * factor,
            points_per_t_axis=self.points_per_t_axis * factor,
        )

    def coarsen(self, factor: int) -> "GridSpec":
        return GridSpec(
            n=self.n,
            half_width_z=self.half_width_z,
            half_width_t=self.half_width_t,
            points_per_z_axis=self.points_per_z_axis // factor,
            points_per_t_axis=self.points_per_t_axis // factor,
        )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    # Kernel plumbing
    def _layout(self):
        shape = np.asarray(self.shape, dtype=np.int64)
        strides = np.ones(self.d, dtype=np.int64)
        for k in range(self.d - 2, -1, -1):
            strides[k] = strides[k + 1] * shape[k + 1]
        return shape, strides, self.lower, self.steps


class SampledFunction:
    """Values of a function at every node of a GridSpec."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: GridSpec, values: np.ndarray):
        values = np.array(values, copy=True)
        if values.dtype.kind not in "fc":
            values = values.astype(float)
        if values.shape != grid.shape:
            raise GridMismatchError(f"values of shape {values.shape} do not match grid shape {grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("sampled function has non-finite values")
        values.setflags(write=False)
        self.grid = grid
        self.values = values

    @classmethod
    def zeros(cls, grid: GridSpec) -> "SampledFunction":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def from_callable(cls, grid: GridSpec, fn) -> "SampledFunction":
        """Sample fn(coords) where coords has shape (..., 2n+1)."""
        coords = grid.node_coords().reshape(grid.shape + (grid.d,))
        return cls(grid, fn(coords))

    def with_values(self, values: np.ndarray) -> "SampledFunction":
        return SampledFunction(self.grid, values)

    def support(self) -> Optional[Tuple[Tuple[int, int], ...]]:
        """Bounding index box (inclusive lo, exclusive hi) of the nonzero values."""
        nonzero = np.nonzero(self.values)
        if nonzero[0].size == 0:
            return None
        return tuple((int(ix.min()), int(ix.max()) + 1) for ix in nonzero)

    def nonzero_count(self) -> int:
        return int(np.count_nonzero(self.values))

    @property
    def is_complex(self) -> bool:
        return self.values.dtype.kind == "c"

    def _coerce(self, other: "SampledFunction") -> np.ndarray:
        require_same_grid(self, other)
        return other.values

    def __add__(self, other: "SampledFunction") -> "SampledFunction":
        return self.with_values(self.values + self._coerce(other))

    def __sub__(self, other: "SampledFunction") -> "SampledFunction":
        return self.with_values(self.values - self._coerce(other))

    def __mul__(self, scalar: Union[int, float, complex]) -> "SampledFunction":
        return self.with_values(self.values * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "SampledFunction":
        return self.with_values(-self.values)

    def __repr__(self) -> str:
        return f"SampledFunction(shape={self.grid.shape}, nonzeros={self.nonzero_count()})"


class Sampled1DFunction:
    """Values on the t-axis nodes of a GridSpec."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: GridSpec, values: np.ndarray):
        values = np.array(values, dtype=float, copy=True)
        if values.shape != (grid.points_per_t_axis,):
            raise GridMismatchError(
                f"t-axis samples of length {values.shape} do not match {grid.points_per_t_axis} t-nodes"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("sampled function has non-finite values")
        values.setflags(write=False)
        self.grid = grid
        self.values = values

    @property
    def axis(self) -> np.ndarray:
        return self.grid.axis(self.grid.d - 1)

    def integrate(self) -> float:
        return float(np.sum(self.values) * self.grid.h_t)

    def moment(self, gamma: int) -> float:
        return float(np.sum(self.axis ** gamma * self.values) * self.grid.h_t)


def require_same_grid(f, g):
    if f.grid != g.grid:
        raise GridMismatchError(f"grid mismatch: {f.grid} vs {g.grid}")


def integrate(f: SampledFunction) -> float:
    """Rectangle rule: sum of values times the cell volume."""
    total = np.sum(f.values)
    return complex(total) * f.grid.cell_volume if f.is_complex else float(total) * f.grid.cell_volume


def inner(f: SampledFunction, g: SampledFunction) -> float:
    require_same_grid(f, g)
    return float(np.real(np.sum(f.values * np.conj(g.values)))) * f.grid.cell_volume


def l2_norm(f: SampledFunction) -> float:
    return math.sqrt(float(np.sum(np.abs(f.values) ** 2)) * f.grid.cell_volume)


def l1_norm(f: SampledFunction) -> float:
    return float(np.sum(np.abs(f.values))) * f.grid.cell_volume


def evaluate_at(f: SampledFunction, points: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of f at arbitrary points (shape (P, 2n+1)), zero outside the box."""
    points = np.ascontiguousarray(np.asarray(points, dtype=float).reshape(-1, f.grid.d))
    if f.is_complex:
        re = evaluate_at(f.with_values(f.values.real), points)
        im = evaluate_at(f.with_values(f.values.imag), points)
        return re + 1j * im
    shape, strides, lo, step = f.grid._layout()
    dense = np.ascontiguousarray(f.values, dtype=float).ravel()
    return _kernels.interpolate_points(dense, shape, strides, lo, step, points)


def convolve(
    f: SampledFunction,
    g: SampledFunction,
    summation: str = "auto",
    at: Optional[np.ndarray] = None,
) -> Union[SampledFunction, np.ndarray]:
    """Heisenberg convolution (f*g)(x) = sum_y f(y) g(y^-1 o x) w.

    ``summation="left"`` sums over the nonzero nodes of f and interpolates g,
    ``"right"`` uses the equivalent form sum_z f(x o z^-1) g(z) w, summing over
    g's nonzero nodes; ``"auto"`` picks the sparser operand. Terms are taken
    in lexicographic node order. With ``at`` (flat node indices) only those
    nodes are evaluated and a plain array is returned.
    """
    require_same_grid(f, g)
    if summation not in ("auto", "left", "right"):
        raise ValueError(f"summation must be auto, left or right, got {summation!r}")
    grid = f.grid

    if f.is_complex or g.is_complex:
        fr, fi = f.with_values(f.values.real), f.with_values(f.values.imag)
        gr, gi = g.with_values(g.values.real), g.with_values(g.values.imag)
        real = _as_values(convolve(fr, gr, summation, at)) - _as_values(convolve(fi, gi, summation, at))
        imag = _as_values(convolve(fr, gi, summation, at)) + _as_values(convolve(fi, gr, summation, at))
        out = real + 1j * imag
        return out if at is not None else SampledFunction(grid, out)

    if summation == "auto":
        summation = "left" if f.nonzero_count() <= g.nonzero_count() else "right"
    src, dense_fn = (f, g) if summation == "left" else (g, f)

    flat = np.flatnonzero(src.values)
    out_flat = np.arange(grid.size) if at is None else np.asarray(at, dtype=np.int64).ravel()
    if flat.size == 0 or out_flat.size == 0:
        values = np.zeros(out_flat.size)
    else:
        src_vals = np.ascontiguousarray(src.values.ravel()[flat], dtype=float)
        src_pts = np.ascontiguousarray(-grid.node_coords(flat))
        out_pts = np.ascontiguousarray(grid.node_coords(out_flat))
        shape, strides, lo, step = grid._layout()
        dense = np.ascontiguousarray(dense_fn.values, dtype=float).ravel()
        values = _kernels.gather_convolution(
            src_vals, src_pts, summation == "left", dense, shape, strides, lo, step, out_pts, grid.n
        ) * grid.cell_volume
    logger.debug(f"convolve ({summation}): {flat.size} source nodes -> {out_flat.size} outputs")
    if at is not None:
        return values
    return SampledFunction(grid, values.reshape(grid.shape))


def _as_values(result) -> np.ndarray:
    return result.values if isinstance(result, SampledFunction) else result


def partial_convolve_t(f: SampledFunction, w: Sampled1DFunction) -> SampledFunction:
    """Ordinary 1-D convolution in t for every z-column, zero extension, direct sums."""
    if w.grid.points_per_t_axis != f.grid.points_per_t_axis or w.grid.half_width_t != f.grid.half_width_t:
        raise GridMismatchError("t-axis of the 1-D profile does not match the function's t-axis")
    grid = f.grid
    columns = np.ascontiguousarray(np.asarray(f.values, dtype=float).reshape(-1, grid.points_per_t_axis))
    lag = np.ascontiguousarray(w.values, dtype=float)
    out = _kernels.convolve_columns(columns, lag, grid.points_per_t_axis // 2) * grid.h_t
    return SampledFunction(grid, out.reshape(grid.shape))


def convolve_line(a: Sampled1DFunction, b: Sampled1DFunction) -> Sampled1DFunction:
    """1-D convolution a *_R b on the shared t-axis."""
    if a.grid.points_per_t_axis != b.grid.points_per_t_axis or a.grid.half_width_t != b.grid.half_width_t:
        raise GridMismatchError("t-axes differ")
    columns = np.ascontiguousarray(np.asarray(a.values, dtype=float)[None, :])
    out = _kernels.convolve_columns(columns, np.ascontiguousarray(b.values), a.grid.points_per_t_axis // 2)
    return Sampled1DFunction(a.grid, out[0] * a.grid.h_t)


def reflect(f: SampledFunction, conjugate: bool = False) -> SampledFunction:
    """f~(g) = f(g^-1), or its conjugate f^v. Node i maps to node N - i; node 0 has no mirror."""
    values = np.asarray(f.values)
    for axis in range(values.ndim):
        values = np.roll(np.flip(values, axis=axis), 1, axis=axis)
        edge = [slice(None)] * values.ndim
        edge[axis] = 0
        values[tuple(edge)] = 0
    if conjugate:
        values = np.conj(values)
    return f.with_values(values)


def reflect_line(w: Sampled1DFunction) -> Sampled1DFunction:
    values = np.roll(np.flip(np.asarray(w.values)), 1)
    values[0] = 0.0
    return Sampled1DFunction(w.grid, values)


def dilate_function(r: float, f: SampledFunction) -> SampledFunction:
    """D_r f(g) = r^Q f(delta_r g), resampled by a cubic spline; zero outside the box.

    Points delta_r g that land on nodes (r = 2 on a box whose half-widths are
    multiples of the steps) reproduce the node values exactly.
    """
    if not r > 0:
        raise ValueError(f"dilation factor must be positive, got {r}")
    if r == 1:
        return f
    grid = f.grid
    points = dilate_arrays(r, grid.node_coords())
    index = ((points - grid.lower) / grid.steps).T
    if f.is_complex:
        values = _spline_resample(f.values.real, index) + 1j * _spline_resample(f.values.imag, index)
    else:
        values = _spline_resample(np.asarray(f.values, dtype=float), index)
    return f.with_values(values.reshape(grid.shape) * r ** grid.Q)


def _spline_resample(values: np.ndarray, index: np.ndarray) -> np.ndarray:
    return ndimage.map_coordinates(values, index, order=3, mode="grid-constant", cval=0.0, prefilter=True)


def translate(f: SampledFunction, h: Sequence[float]) -> SampledFunction:
    """f_h(g) = f(h o g)."""
    grid = f.grid
    h = np.asarray(h, dtype=float)
    if h.shape != (grid.d,):
        raise DimensionMismatchError(f"translation needs {grid.d} coordinates, got {h.shape}")
    points = multiply_arrays(np.broadcast_to(h, (grid.size, grid.d)), grid.node_coords())
    return f.with_values(evaluate_at(f, points).reshape(grid.shape))


def gaussian_bump(grid: GridSpec, sigma_z: float, sigma_t: float) -> SampledFunction:
    """exp(-(|z|^2 / sigma_z^2 + t^2 / sigma_t^2)) at the origin."""
    def fn(coords):
        z2 = np.sum(coords[..., :-1] ** 2, axis=-1)
        return np.exp(-(z2 / sigma_z ** 2 + coords[..., -1] ** 2 / sigma_t ** 2))
    return SampledFunction.from_callable(grid, fn)


def box_indicator(grid: GridSpec, lower: Sequence[float], upper: Sequence[float]) -> SampledFunction:
    coords = grid.node_coords().reshape(grid.shape + (grid.d,))
    inside = np.all((coords >= np.asarray(lower)) & (coords < np.asarray(upper)), axis=-1)
    return SampledFunction(grid, inside.astype(float))


def smooth_window(s: np.ndarray) -> np.ndarray:
    """exp(1 - 1/(1 - s^2)) on |s| < 1, zero elsewhere; equals 1 at s = 0."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def band_limited_field(
    grid: GridSpec,
    seed: int,
    modes: int = 8,
    radius: Optional[float] = None,
    band: float = 0.25,
) -> SampledFunction:
    """Seeded smooth test field: random low-frequency plane waves under a C-infinity window.

    Frequencies are drawn up to ``band`` times the Nyquist frequency of each
    axis; the window lives on the smooth-gauge ball of ``radius`` (half the
    box by default).
    """
    rng = np.random.default_rng(seed)
    if radius is None:
        radius = 0.5 * min(grid.half_width_z, math.sqrt(grid.half_width_t))
    nyquist = 0.5 / grid.steps
    freqs = rng.uniform(-1.0, 1.0, size=(modes, grid.d)) * band * nyquist
    phases = rng.uniform(0.0, 2.0 * math.pi, size=modes)
    amps = rng.normal(size=modes)
    coords = grid.node_coords()
    field = np.zeros(grid.size)
    for m in range(modes):
        field += amps[m] * np.cos(2.0 * math.pi * coords @ freqs[m] + phases[m])
    field *= smooth_window(smooth_gauge_arrays(coords) / radius)
    return SampledFunction(grid, field.reshape(grid.shape))


# Binary container

def save(f: Union[SampledFunction, Sampled1DFunction], path: Union[str, Path],
         metadata: Optional[Dict[str, Any]] = None) -> Path:
    """Write the little-endian container plus a JSON sidecar next to it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    grid = f.grid
    kind = 1 if isinstance(f, Sampled1DFunction) else 0
    values = np.asarray(f.values)
    if values.dtype.kind == "c":
        raise ValueError("the container stores real fields only")
    header = _HEADER.pack(
        CONTAINER_MAGIC, CONTAINER_VERSION, kind, grid.n,
        grid.points_per_z_axis, grid.points_per_t_axis,
        grid.half_width_z, grid.half_width_t,
    )
    with open(path, "wb") as handle:
        handle.write(header)
        handle.write(np.ascontiguousarray(values, dtype="<f8").tobytes())
    sidecar = {
        "format": "flagwave-container",
        "version": CONTAINER_VERSION,
        "kind": "t-axis" if kind else "full",
        "grid": grid.to_dict(),
        "dtype": "<f8",
        "metadata": metadata or {},
    }
    with open(_sidecar_path(path), "w") as handle:
        json.dump(sidecar, handle, indent=2, sort_keys=True)
    logger.info(f"Saved sampled field to {path}")
    return path


def load(path: Union[str, Path]) -> Union[SampledFunction, Sampled1DFunction]:
    path = Path(path)
    with open(path, "rb") as handle:
        raw = handle.read()
    magic, version, kind, n, nz, nt, lz, lt = _HEADER.unpack_from(raw, 0)
    if magic != CONTAINER_MAGIC:
        raise ValueError(f"{path} is not a flagwave container")
    if version != CONTAINER_VERSION:
        raise ValueError(f"unsupported container version {version}")
    grid = GridSpec(n=n, half_width_z=lz, half_width_t=lt, points_per_z_axis=nz, points_per_t_axis=nt)
    payload = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).astype(float)
    sidecar = _sidecar_path(path)
    if sidecar.exists():
        with open(sidecar) as handle:
            meta = json.load(handle)
        if GridSpec(**meta["grid"]) != grid:
            raise GridMismatchError(f"sidecar {sidecar} disagrees with the container header")
    if kind == 1:
        return Sampled1DFunction(grid, payload)
    return SampledFunction(grid, payload.reshape(grid.shape))


def load_metadata(path: Union[str, Path]) -> Dict[str, Any]:
    with open(_sidecar_path(Path(path))) as handle:
        return json.load(handle).get("metadata", {})


def _sidecar_path(path: Path) -> Path:
    return path.with_name(path.name + ".json")
