#!/usr/bin/env python3
"""
Sampling, quadrature, convolution and container tests for flagwave.grid
"""

import math
import sys

import numpy as np
import pytest

sys.path.insert(0, '.')

from flagwave import _kernels
from flagwave.errors import GridMismatchError
from flagwave.grid import (
    GridSpec,
    Sampled1DFunction,
    SampledFunction,
    band_limited_field,
    convolve,
    dilate_function,
    evaluate_at,
    gaussian_bump,
    integrate,
    l2_norm,
    load,
    load_metadata,
    partial_convolve_t,
    reflect,
    reflect_line,
    save,
    smooth_window,
    translate,
)
from flagwave.heisenberg_core import MultiIndex, apply_multi_index, multiply_arrays, vector_field


def random_field(grid, seed):
    return SampledFunction(grid, np.random.default_rng(seed).normal(size=grid.shape))


def test_default_grid_geometry():
    grid = GridSpec()
    assert grid.shape == (32, 32, 64)
    assert (grid.h_z, grid.h_t) == (0.25, 0.5)
    assert grid.Q == 4
    assert not grid.twist_aligned
    assert grid.cell_volume == 0.25 * 0.25 * 0.5


def test_origin_is_a_node(small_grid):
    assert small_grid.twist_aligned
    i = small_grid.nearest_index(0.0, 0)
    assert small_grid.axis(0)[i] == 0.0
    assert small_grid.axis(2)[small_grid.nearest_index(0.0, 2)] == 0.0


def test_invalid_grids_are_rejected():
    with pytest.raises(ValueError):
        GridSpec(points_per_z_axis=31)
    with pytest.raises(ValueError):
        GridSpec(half_width_t=0.0)


def test_refine_keeps_the_box(small_grid):
    fine = small_grid.refine(2)
    assert fine.shape == (32, 32, 64)
    assert fine.box_volume == small_grid.box_volume
    assert fine.coarsen(2) == small_grid


def test_sampled_function_is_read_only(small_grid):
    f = SampledFunction.zeros(small_grid)
    with pytest.raises(ValueError):
        f.values[0, 0, 0] = 1.0
    with pytest.raises(GridMismatchError):
        SampledFunction(small_grid, np.zeros((2, 2, 2)))
    with pytest.raises(ValueError):
        SampledFunction(small_grid, np.full(small_grid.shape, np.nan))


def test_rectangle_rule(small_grid):
    ones = SampledFunction(small_grid, np.ones(small_grid.shape))
    assert integrate(ones) == pytest.approx(small_grid.box_volume, rel=1e-12)
    assert l2_norm(ones * 2.0) == pytest.approx(2.0 * np.sqrt(small_grid.box_volume), rel=1e-12)


def _brute_convolution(f, g):
    grid = f.grid
    coords = grid.node_coords()
    out = np.zeros(grid.size)
    flat_f = f.values.ravel()
    for p, x in enumerate(coords):
        targets = multiply_arrays(-coords, np.broadcast_to(x, coords.shape))
        out[p] = np.sum(flat_f * evaluate_at(g, targets)) * grid.cell_volume
    return out.reshape(grid.shape)


def test_convolution_matches_triple_loop(tiny_grid):
    f = random_field(tiny_grid, 1)
    g = random_field(tiny_grid, 2)
    expected = _brute_convolution(f, g)
    assert np.allclose(convolve(f, g, summation="left").values, expected, rtol=1e-12, atol=1e-12)


def test_left_and_right_gathers_agree_on_aligned_grid(tiny_grid):
    f = random_field(tiny_grid, 3)
    g = random_field(tiny_grid, 4)
    left = convolve(f, g, summation="left").values
    right = convolve(f, g, summation="right").values
    assert np.allclose(left, right, rtol=1e-11, atol=1e-11)


def test_compiled_gather_is_bit_exact_against_python(tiny_grid):
    f = random_field(tiny_grid, 5)
    g = random_field(tiny_grid, 6)
    flat = np.flatnonzero(f.values)
    shape, strides, lo, step = tiny_grid._layout()
    args = (
        np.ascontiguousarray(f.values.ravel()[flat]),
        np.ascontiguousarray(-tiny_grid.node_coords(flat)),
        True,
        np.ascontiguousarray(g.values).ravel(),
        shape, strides, lo, step,
        np.ascontiguousarray(tiny_grid.node_coords()),
        tiny_grid.n,
    )
    compiled = _kernels.gather_convolution(*args)
    python = _kernels.gather_convolution.py_func(*args)
    assert np.array_equal(compiled, python)


def test_evaluation_subset_matches_full_convolution(tiny_grid):
    f = random_field(tiny_grid, 7)
    g = random_field(tiny_grid, 8)
    at = np.array([0, 17, 255, 300, tiny_grid.size - 1])
    assert np.array_equal(convolve(f, g, summation="left", at=at), convolve(f, g, summation="left").values.ravel()[at])


def test_delta_is_the_convolution_identity(small_grid):
    f = band_limited_field(small_grid, seed=11)
    delta = np.zeros(small_grid.shape)
    delta[8, 8, 16] = 1.0 / small_grid.cell_volume
    e = SampledFunction(small_grid, delta)
    assert np.allclose(convolve(f, e).values, f.values, atol=1e-12)
    assert np.allclose(convolve(e, f).values, f.values, atol=1e-12)


def test_grid_mismatch_is_rejected(small_grid, tiny_grid):
    with pytest.raises(GridMismatchError):
        convolve(SampledFunction.zeros(small_grid), SampledFunction.zeros(tiny_grid))
    with pytest.raises(ValueError):
        convolve(SampledFunction.zeros(small_grid), SampledFunction.zeros(small_grid), summation="middle")


def test_reflection_maps_node_i_to_N_minus_i(tiny_grid):
    f = random_field(tiny_grid, 9)
    r = reflect(f).values
    assert np.array_equal(r[1:, 1:, 1:], f.values[:0:-1, :0:-1, :0:-1])
    assert not np.any(r[0]) and not np.any(r[:, 0]) and not np.any(r[..., 0])


def test_reflect_line_keeps_even_profiles(small_grid):
    v = small_grid.axis(2)
    w = Sampled1DFunction(small_grid, np.exp(-v ** 2) * (np.abs(v) < 1.5))
    assert np.array_equal(reflect_line(w).values, w.values)


def test_partial_convolution_with_a_line_delta(small_grid):
    f = band_limited_field(small_grid, seed=12)
    delta = np.zeros(small_grid.points_per_t_axis)
    delta[small_grid.points_per_t_axis // 2] = 1.0 / small_grid.h_t
    out = partial_convolve_t(f, Sampled1DFunction(small_grid, delta))
    assert np.allclose(out.values, f.values, atol=1e-12)


def test_translation_by_identity(small_grid):
    f = band_limited_field(small_grid, seed=13)
    assert np.allclose(translate(f, [0.0, 0.0, 0.0]).values, f.values, atol=1e-14)


def _window_and_slope(s):
    w = smooth_window(s)
    inside = np.abs(s) < 1.0
    slope = np.zeros_like(w)
    slope[inside] = w[inside] * (-2.0 * s[inside] / (1.0 - s[inside] ** 2) ** 2)
    return w, slope


def product_bump(grid, a, b, shift=(0.0, 0.0, 0.0)):
    """w(x/a) w(y/a) w(t/b) around shift, with its X, Y, T derivatives taken analytically."""
    coords = grid.node_coords().reshape(grid.shape + (3,))
    local = coords - np.asarray(shift)
    (wx, sx), (wy, sy), (wt, st) = (_window_and_slope(local[..., k] / s) for k, s in enumerate((a, a, b)))
    dx, dy, dt = sx * wy * wt / a, wx * sy * wt / a, wx * wy * st / b
    x, y = coords[..., 0], coords[..., 1]
    fields = {
        "left": (dx + 2.0 * y * dt, dy - 2.0 * x * dt, dt),
        "right": (dx - 2.0 * y * dt, dy + 2.0 * x * dt, dt),
    }
    return SampledFunction(grid, wx * wy * wt), {
        variant: [SampledFunction(grid, v) for v in values] for variant, values in fields.items()
    }


def relative_gap(a, b):
    return l2_norm(a - b) / l2_norm(a)


@pytest.fixture(scope="module")
def fine_aligned_grid():
    """h_z = 1/8, h_t = 2 h_z^2 = 1/32."""
    return GridSpec(n=1, half_width_z=1.5, half_width_t=2.0, points_per_z_axis=24, points_per_t_axis=128)


def test_left_field_passes_through_convolution(fine_aligned_grid):
    f, _ = product_bump(fine_aligned_grid, 0.5, 0.25, shift=(0.125, 0.0, 0.0))
    g, fields = product_bump(fine_aligned_grid, 0.75, 0.5, shift=(0.0, -0.125, 0.0))
    fg = convolve(f, g)
    for axis in range(3):
        lhs = apply_multi_index(MultiIndex(tuple(int(a == axis) for a in range(3))), fg)
        assert relative_gap(lhs, convolve(f, fields["left"][axis])) <= 0.05


def test_field_moves_across_the_convolution(fine_aligned_grid):
    # (X f) * g = f * (X~ g) with X~ the right-invariant twin
    f, f_fields = product_bump(fine_aligned_grid, 0.5, 0.25, shift=(0.125, 0.0, 0.0))
    g, g_fields = product_bump(fine_aligned_grid, 0.75, 0.5, shift=(0.0, -0.125, 0.0))
    for axis in range(3):
        lhs = convolve(f_fields["left"][axis], g)
        rhs = convolve(f, g_fields["right"][axis])
        assert relative_gap(lhs, rhs) <= 0.05


def test_convolution_identity_error_is_second_order():
    coarse = GridSpec(n=1, half_width_z=1.5, half_width_t=2.0, points_per_z_axis=24, points_per_t_axis=64)
    errors = []
    for grid in (coarse, coarse.refine(2)):
        # three point masses at nodes shared by both grids
        masses = np.zeros(grid.shape)
        for point, weight in (((0.0, 0.0, 0.0), 1.0), ((0.25, 0.0, 0.0), -0.5), ((0.0, -0.25, 0.125), 0.75)):
            masses[tuple(grid.nearest_index(c, k) for k, c in enumerate(point))] = weight
        f = SampledFunction(grid, masses)
        g, fields = product_bump(grid, 1.0, 1.0)
        fg = convolve(f, g)
        per_axis = []
        for axis in range(3):
            lhs = apply_multi_index(MultiIndex(tuple(int(a == axis) for a in range(3))), fg)
            per_axis.append(relative_gap(lhs, convolve(f, fields["left"][axis])))
        errors.append(per_axis)
    for e_coarse, e_fine in zip(*errors):
        assert e_fine > 0
        assert math.log2(e_coarse / e_fine) >= 1.5


def test_convolution_commutes_with_reflection(small_grid):
    # (f * g)~ = g~ * f~ on an aligned grid, for fields supported well inside the box
    rng = np.random.default_rng(21)
    inner = np.zeros(small_grid.shape, dtype=bool)
    inner[6:11, 6:11, 14:19] = True
    f = SampledFunction(small_grid, np.where(inner, rng.normal(size=small_grid.shape), 0.0))
    g = SampledFunction(small_grid, np.where(inner, rng.normal(size=small_grid.shape), 0.0))
    lhs = reflect(convolve(f, g)).values
    rhs = convolve(reflect(g), reflect(f)).values
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


def test_dilation_preserves_mass(desk_grid):
    f = gaussian_bump(desk_grid, 0.75, 1.5)
    compressed = dilate_function(2.0, f)
    assert abs(integrate(compressed) - integrate(f)) <= 1e-3 * integrate(f)
    # delta_2 maps nodes to nodes, so D_2 is plain resampling there
    assert compressed.values[16, 16, 32] == pytest.approx(2.0 ** desk_grid.Q, rel=1e-12)


def test_dilation_round_trip(desk_grid):
    f = gaussian_bump(desk_grid, 0.75, 1.5)
    back = dilate_function(0.5, dilate_function(2.0, f))
    assert relative_gap(f, back) <= 0.05
    assert dilate_function(1.0, f) is f
    with pytest.raises(ValueError):
        dilate_function(0.0, f)


def test_dilation_of_complex_samples(desk_grid):
    f = gaussian_bump(desk_grid, 0.75, 1.5)
    z = dilate_function(2.0, f.with_values(f.values * (1.0 - 2.0j)))
    real = dilate_function(2.0, f)
    assert np.allclose(z.values, real.values * (1.0 - 2.0j), rtol=1e-12, atol=1e-12)


def test_band_limited_field_is_seeded(small_grid):
    a = band_limited_field(small_grid, seed=1)
    b = band_limited_field(small_grid, seed=1)
    c = band_limited_field(small_grid, seed=2)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)
    # compact support inside the box
    assert not np.any(a.values[0]) and not np.any(a.values[..., 0])


def test_container_round_trip_and_magic(small_grid, tmp_path):
    f = band_limited_field(small_grid, seed=4)
    path = save(f, tmp_path / "field.flgw", metadata={"seed": 4})
    g = load(path)
    assert g.grid == small_grid
    assert np.array_equal(g.values, f.values)
    assert load_metadata(path) == {"seed": 4}

    bad = tmp_path / "bad.flgw"
    bad.write_bytes(b"XXXX" + path.read_bytes()[4:])
    with pytest.raises(ValueError):
        load(bad)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__]))
