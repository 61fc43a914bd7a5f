#!/usr/bin/env python3
"""
Group-law, norm and vector-field tests for flagwave.heisenberg_core
"""

import math
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

sys.path.insert(0, '.')

from flagwave.errors import DimensionMismatchError
from flagwave.grid import SampledFunction
from flagwave.heisenberg_core import (
    Dimension,
    GroupPoint,
    MultiIndex,
    apply_multi_index,
    dilate,
    inverse,
    multi_indices,
    multiply,
    norm,
    norm_arrays,
    quasi_triangle_constant,
    smooth_gauge,
    vector_field,
)

coordinate = st.integers(min_value=-64, max_value=64).map(lambda v: v / 8.0)
points = st.tuples(coordinate, coordinate, coordinate).map(GroupPoint)
powers_of_two = st.integers(min_value=-4, max_value=4).map(lambda m: 2.0 ** m)


def close(g: GroupPoint, h: GroupPoint, tol: float = 1e-9) -> bool:
    scale = 1.0 + max(abs(c) for c in g.coords + h.coords)
    return np.allclose(g.as_array(), h.as_array(), rtol=0.0, atol=tol * scale * scale)


def test_product_matches_the_twisted_law():
    g = GroupPoint.from_xyt([1.0], [2.0], 3.0)
    h = GroupPoint.from_xyt([-0.5], [4.0], 1.0)
    # t + t' + 2 y x' - 2 x y' = 3 + 1 + 2*2*(-0.5) - 2*1*4
    assert multiply(g, h).coords == (0.5, 6.0, -6.0)


@given(points, points, points)
@settings(max_examples=200)
def test_associative(g, h, k):
    assert close(multiply(multiply(g, h), k), multiply(g, multiply(h, k)))


@given(points)
def test_inverse_and_identity(g):
    e = GroupPoint.identity(1)
    assert multiply(g, inverse(g)) == e
    assert multiply(inverse(g), g) == e
    assert multiply(g, e) == g


@given(points, points, powers_of_two)
def test_dilation_is_an_automorphism(g, h, r):
    assert close(dilate(r, multiply(g, h)), multiply(dilate(r, g), dilate(r, h)))


@given(points, powers_of_two)
def test_norms_are_homogeneous(g, r):
    assert norm(dilate(r, g)) == pytest.approx(r * norm(g), rel=1e-12, abs=1e-300)
    assert smooth_gauge(dilate(r, g)) == pytest.approx(r * smooth_gauge(g), rel=1e-12, abs=1e-300)


@given(points)
def test_norm_is_symmetric(g):
    assert norm(inverse(g)) == norm(g)


def test_quasi_triangle_constant_range():
    gamma = quasi_triangle_constant(20000, seed=7)
    assert 1.0 <= gamma <= 2.0
    assert gamma == quasi_triangle_constant(20000, seed=7)


def test_quasi_triangle_pairs_with_the_identity():
    # one random pair may fall below 1; its identity partner gives exactly 1
    for seed in range(10):
        assert quasi_triangle_constant(1, seed=seed) >= 1.0


def test_dimension_and_point_validation():
    assert Dimension(2).Q == 6
    with pytest.raises(DimensionMismatchError):
        Dimension(0)
    with pytest.raises(DimensionMismatchError):
        GroupPoint((1.0, 2.0))
    with pytest.raises(DimensionMismatchError):
        multiply(GroupPoint.identity(1), GroupPoint.identity(2))


def test_multi_index_degree_counts_t_twice():
    assert MultiIndex((1, 0, 1)).degree == 3
    assert MultiIndex((1, 0, 1)).order == 2
    assert [m.i for m in multi_indices(1, 2)] == [
        (0, 0, 0), (0, 1, 0), (1, 0, 0), (0, 0, 1), (0, 2, 0), (1, 1, 0), (2, 0, 0),
    ]
    assert all(m.degree <= 4 for m in multi_indices(2, 4))


def _coordinate_field(grid, k):
    return SampledFunction(grid, np.broadcast_to(grid.coordinate(k), grid.shape))


def test_right_field_on_t_gives_minus_two_y(small_grid):
    t = _coordinate_field(small_grid, 2)
    y = np.broadcast_to(small_grid.coordinate(1), small_grid.shape)
    assert np.allclose(vector_field(1, t, variant="right").values, -2.0 * y, atol=1e-12)
    assert np.allclose(vector_field(1, t, variant="left").values, 2.0 * y, atol=1e-12)


def test_t_field_on_t_is_one(small_grid):
    t = _coordinate_field(small_grid, 2)
    assert np.allclose(vector_field(3, t).values, 1.0)


def test_left_fields_commute_to_minus_four_t(small_grid):
    # [X, Y] = -4 T; f = (x + y) t keeps every intermediate quadratic, so the stencils are exact
    coords = small_grid.node_coords().reshape(small_grid.shape + (3,))
    f = SampledFunction(small_grid, coords[..., 0] * coords[..., 2] + coords[..., 1] * coords[..., 2])
    commutator = vector_field(1, vector_field(2, f)) - vector_field(2, vector_field(1, f))
    assert np.allclose(commutator.values, -4.0 * vector_field(3, f).values, atol=1e-9)
    # X^I applies its rightmost factor first
    assert np.array_equal(apply_multi_index(MultiIndex((1, 1, 0)), f).values, vector_field(1, vector_field(2, f)).values)


def test_vector_field_index_range(small_grid):
    f = SampledFunction.zeros(small_grid)
    with pytest.raises(DimensionMismatchError):
        vector_field(4, f)
    with pytest.raises(ValueError):
        vector_field(1, f, variant="middle")


def test_ball_volume_scales_like_r_to_the_Q():
    # |B(0, r)| = r^Q |B(0, 1)| checked by Monte Carlo on the same seed
    rng = np.random.default_rng(3)
    samples = rng.uniform(-1.0, 1.0, size=(200000, 3)) * np.array([2.0, 2.0, 4.0])
    rho = norm_arrays(samples)
    inside_small = np.mean(rho <= 1.0)
    inside_big = np.mean(rho <= 2.0)
    ratio = inside_big / inside_small
    assert math.isclose(ratio, 2.0 ** 4, rel_tol=0.15)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__]))
