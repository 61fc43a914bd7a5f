"""
Heisenberg Group Core
=====================

Arithmetic of the Heisenberg group H^n on R^{2n+1}: the twisted product,
inversion, anisotropic dilations, the homogeneous norm, multi-index
bookkeeping and finite-difference invariant vector fields.

Points are stored as coordinate vectors [x_1..x_n, y_1..y_n, t]. The
array-level helpers (``multiply_arrays`` and friends) operate on the last
axis so they can be used on whole node clouds at once.

Author: Yourl.Cloud Inc.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterator, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatchError

if TYPE_CHECKING:
    from .grid import SampledFunction

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Dimension:
    """Topological dimension n and homogeneous dimension Q = 2n + 2."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise DimensionMismatchError(f"n must be a positive integer, got {self.n}")

    @property
    def Q(self) -> int:
        return 2 * self.n + 2

    @property
    def coords(self) -> int:
        return 2 * self.n + 1


@dataclass(frozen=True)
class GroupPoint:
    """A point [x, y, t] of H^n."""

    coords: Tuple[float, ...]

    def __post_init__(self):
        if len(self.coords) < 3 or len(self.coords) % 2 == 0:
            raise DimensionMismatchError(
                f"a point of H^n needs 2n+1 coordinates, got {len(self.coords)}"
            )
        object.__setattr__(self, "coords", tuple(float(c) for c in self.coords))

    @classmethod
    def from_xyt(cls, x: Sequence[float], y: Sequence[float], t: float) -> "GroupPoint":
        if len(x) != len(y):
            raise DimensionMismatchError(f"x has length {len(x)} but y has length {len(y)}")
        return cls(tuple(x) + tuple(y) + (t,))

    @classmethod
    def identity(cls, n: int) -> "GroupPoint":
        return cls((0.0,) * (2 * n + 1))

    @property
    def n(self) -> int:
        return (len(self.coords) - 1) // 2

    @property
    def x(self) -> np.ndarray:
        return np.asarray(self.coords[: self.n])

    @property
    def y(self) -> np.ndarray:
        return np.asarray(self.coords[self.n: 2 * self.n])

    @property
    def t(self) -> float:
        return self.coords[-1]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)


@dataclass(frozen=True)
class MultiIndex:
    """Exponent vector I = (i_1, ..., i_{2n+1}) for monomials and X^I."""

    i: Tuple[int, ...]

    def __post_init__(self):
        if len(self.i) < 3 or len(self.i) % 2 == 0:
            raise DimensionMismatchError(f"multi-index needs 2n+1 entries, got {len(self.i)}")
        if any(v < 0 for v in self.i):
            raise ValueError(f"multi-index entries must be nonnegative: {self.i}")
        object.__setattr__(self, "i", tuple(int(v) for v in self.i))

    @property
    def n(self) -> int:
        return (len(self.i) - 1) // 2

    @property
    def order(self) -> int:
        return sum(self.i)

    @property
    def degree(self) -> int:
        # t counts twice
        return sum(self.i[:-1]) + 2 * self.i[-1]


def multi_indices(n: int, max_degree: int) -> Iterator[MultiIndex]:
    """All multi-indices with homogeneous degree <= max_degree, graded then lexicographic."""
    if max_degree < 0:
        return
    found = []
    for t_power in range(max_degree // 2 + 1):
        rest = max_degree - 2 * t_power
        for head in itertools.product(range(rest + 1), repeat=2 * n):
            if sum(head) <= rest:
                found.append(MultiIndex(head + (t_power,)))
    found.sort(key=lambda m: (m.degree, m.i))
    yield from found


# Array-level group arithmetic (last axis holds the 2n+1 coordinates)

def _split(g: np.ndarray, n: int):
    return g[..., :n], g[..., n:2 * n], g[..., 2 * n]


def _check_arrays(g: np.ndarray, h: np.ndarray) -> int:
    if g.shape[-1] != h.shape[-1]:
        raise DimensionMismatchError(
            f"points have {g.shape[-1]} and {h.shape[-1]} coordinates"
        )
    if g.shape[-1] < 3 or g.shape[-1] % 2 == 0:
        raise DimensionMismatchError(f"invalid coordinate count {g.shape[-1]}")
    return (g.shape[-1] - 1) // 2


def multiply_arrays(g: np.ndarray, h: np.ndarray) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    h = np.asarray(h, dtype=float)
    n = _check_arrays(g, h)
    gx, gy, gt = _split(g, n)
    hx, hy, ht = _split(h, n)
    twist = 2.0 * np.sum(gy * hx, axis=-1) - 2.0 * np.sum(gx * hy, axis=-1)
    return np.concatenate([gx + hx, gy + hy, (gt + ht + twist)[..., None]], axis=-1)


def dilate_arrays(r: float, g: np.ndarray) -> np.ndarray:
    if not r > 0:
        raise ValueError(f"dilation factor must be positive, got {r}")
    g = np.asarray(g, dtype=float)
    scale = np.full(g.shape[-1], r)
    scale[-1] = r * r
    return g * scale


def norm_arrays(g: np.ndarray) -> np.ndarray:
    """rho = max(|z|, sqrt|t|)."""
    g = np.asarray(g, dtype=float)
    z_abs = np.sqrt(np.sum(g[..., :-1] ** 2, axis=-1))
    return np.maximum(z_abs, np.sqrt(np.abs(g[..., -1])))


def smooth_gauge_arrays(g: np.ndarray) -> np.ndarray:
    """rho_bar = (|z|^4 + t^2)^(1/4), the C-infinity gauge used inside bumps and kernels."""
    g = np.asarray(g, dtype=float)
    z_sq = np.sum(g[..., :-1] ** 2, axis=-1)
    return (z_sq * z_sq + g[..., -1] ** 2) ** 0.25


# Point-level API

def multiply(g: GroupPoint, h: GroupPoint) -> GroupPoint:
    if g.n != h.n:
        raise DimensionMismatchError(f"cannot multiply points of H^{g.n} and H^{h.n}")
    return GroupPoint(tuple(multiply_arrays(g.as_array(), h.as_array())))


def inverse(g: GroupPoint) -> GroupPoint:
    return GroupPoint(tuple(-c for c in g.coords))


def dilate(r: float, g: GroupPoint) -> GroupPoint:
    return GroupPoint(tuple(dilate_arrays(r, g.as_array())))


def norm(g: GroupPoint) -> float:
    return float(norm_arrays(g.as_array()))


def smooth_gauge(g: GroupPoint) -> float:
    return float(smooth_gauge_arrays(g.as_array()))


def quasi_triangle_constant(sample_count: int, seed: int, n: int = 1) -> float:
    """Empirical sup of rho(g o h) / (rho(g) + rho(h)) over seeded pairs in the unit ball.

    Pairs with a zero denominator are skipped. Every sampled g is also paired
    with the identity, so the estimate never drops below 1.
    """
    if sample_count < 1:
        raise ValueError(f"sample_count must be >= 1, got {sample_count}")
    rng = np.random.default_rng(seed)
    d = 2 * n + 1
    g = _unit_ball_sample(rng, sample_count, d)
    h = _unit_ball_sample(rng, sample_count, d)
    g = np.vstack([g, g])
    h = np.vstack([h, np.zeros_like(h)])
    num = norm_arrays(multiply_arrays(g, h))
    den = norm_arrays(g) + norm_arrays(h)
    keep = den > 0
    gamma = float(np.max(num[keep] / den[keep])) if np.any(keep) else 1.0
    logger.debug(f"quasi-triangle estimate over {sample_count} pairs: {gamma:.6f}")
    return gamma


def _unit_ball_sample(rng: np.random.Generator, count: int, d: int) -> np.ndarray:
    out = np.empty((0, d))
    while out.shape[0] < count:
        batch = rng.uniform(-1.0, 1.0, size=(2 * count, d))
        out = np.vstack([out, batch[norm_arrays(batch) <= 1.0]])
    return out[:count]


# Invariant vector fields

def _field_index_check(j: int, n: int):
    if not 1 <= j <= 2 * n + 1:
        raise DimensionMismatchError(f"vector field index must lie in 1..{2 * n + 1}, got {j}")


def vector_field(j: int, f: "SampledFunction", variant: str = "left") -> "SampledFunction":
    """Central-difference X_j (j <= n), Y_{j-n} (n < j <= 2n) or T (j = 2n+1).

    Left-invariant fields for the product above are X_j = d/dx_j + 2 y_j d/dt
    and Y_j = d/dy_j - 2 x_j d/dt; the right-invariant variant flips both
    drift signs. Both variants agree at the origin.
    """
    if variant not in ("left", "right"):
        raise ValueError(f"variant must be 'left' or 'right', got {variant!r}")
    grid = f.grid
    n = grid.n
    _field_index_check(j, n)
    if min(grid.shape) < 3:
        raise ValueError(f"vector fields need at least 3 points per axis, grid shape is {grid.shape}")

    values = np.asarray(f.values, dtype=float)
    t_axis = 2 * n
    if j == 2 * n + 1:
        return f.with_values(np.gradient(values, grid.h_t, axis=t_axis, edge_order=2))

    sign = 1.0 if variant == "left" else -1.0
    d_axis = np.gradient(values, grid.h_z, axis=j - 1, edge_order=2)
    d_t = np.gradient(values, grid.h_t, axis=t_axis, edge_order=2)
    if j <= n:
        drift = 2.0 * grid.coordinate(n + j - 1)      # +2 y_j
    else:
        drift = -2.0 * grid.coordinate(j - n - 1)     # -2 x_j
    return f.with_values(d_axis + sign * drift * d_t)


def apply_multi_index(index: MultiIndex, f: "SampledFunction", variant: str = "left") -> "SampledFunction":
    """X^I f = X_1^{i_1} ... T^{i_{2n+1}} f; the rightmost factor acts first."""
    if index.n != f.grid.n:
        raise DimensionMismatchError(f"multi-index for H^{index.n} applied on H^{f.grid.n}")
    out = f
    for axis in reversed(range(len(index.i))):
        for _ in range(index.i[axis]):
            out = vector_field(axis + 1, out, variant)
    return out
