#!/usr/bin/env python3
"""
Component and flag wavelet tests for flagwave.wavelets
"""

import math
import sys

import numpy as np
import pytest

sys.path.insert(0, '.')

from flagwave.errors import ResolutionError
from flagwave.grid import integrate, l2_norm, load_metadata, partial_convolve_t
from flagwave.heisenberg_core import multi_indices, smooth_gauge_arrays
from flagwave.wavelets import (
    WaveletSpec,
    build_control_bump,
    calderon_sum,
    derivative_bounds,
    psi1_scale_problem,
    psi2_transfer,
    save_wavelet,
    smooth_step,
    valid_psi1_scales,
)


def test_smooth_step_endpoints():
    values = smooth_step(np.array([-1.0, 0.0, 0.5, 1.0, 2.0]))
    assert values.tolist() == [0.0, 0.0, 0.5, 1.0, 1.0]


def test_spec_validation():
    with pytest.raises(ValueError):
        WaveletSpec(M=-1)
    with pytest.raises(ValueError):
        WaveletSpec(support_radius=0.0)
    assert WaveletSpec(M=4).witness_degree == 6
    assert WaveletSpec(M=3).witness_degree == 4


def test_psi1_scales_on_small_grid(small_bank, wavelet_spec, small_grid):
    psi1 = small_bank.psi1
    assert psi1.valid_scales == [-2]
    assert psi1.reference_scale == -2
    assert valid_psi1_scales(wavelet_spec, small_grid) == [-2]
    assert "cells" in psi1_scale_problem(wavelet_spec, small_grid, -1)
    with pytest.raises(ResolutionError):
        psi1.profile(0)


def test_psi1_moments_vanish(small_bank):
    residuals = small_bank.psi1.moment_residuals(-2)
    assert len(residuals) == len(list(multi_indices(1, 4)))
    assert max(r for _, r in residuals) <= 1e-10
    psi = small_bank.cube(-2)
    assert abs(integrate(psi)) <= 1e-8 * l2_norm(psi)


def test_psi1_normalisation_and_support(small_bank, small_grid):
    psi = small_bank.cube(-2)
    # unit norm at j = 0 and ||D_{2^j} psi||_2 = 2^{jQ/2}
    assert l2_norm(psi) == pytest.approx(2.0 ** (-2 * small_grid.Q / 2), rel=1e-12)
    # r = r0 2^2 = 1: zero outside the unit smooth-gauge ball
    rho = smooth_gauge_arrays(small_grid.node_coords()).reshape(small_grid.shape)
    assert not np.any(psi.values[rho >= 1.0])


def test_psi1_derivative_bounds_are_finite(small_bank):
    bound = derivative_bounds(small_bank.psi1, -2)
    assert math.isfinite(bound) and bound > 0


def test_control_bump_has_mass(wavelet_spec, small_grid):
    control = build_control_bump(wavelet_spec, small_grid)
    assert control.constraint_indices == []
    assert integrate(control.samples) > 0


def test_psi2_transfer_band():
    assert psi2_transfer(np.array([0.4, 2.1, 0.0])).tolist() == [0.0, 0.0, 0.0]
    assert psi2_transfer(np.array([1.0]))[0] > 0


def test_calderon_sum_is_one_on_the_band():
    eta = np.geomspace(0.25, 4.0, 1001)
    assert np.allclose(calderon_sum(eta, range(-3, 4)), 1.0, atol=1e-12)
    # outside the covered octaves the sum drops
    assert calderon_sum(np.array([64.0]), range(-3, 4))[0] == 0.0


def test_psi2_scales_and_symmetry(small_bank):
    psi2 = small_bank.psi2
    assert psi2.valid_scales == [0, 1]
    with pytest.raises(ResolutionError):
        psi2.profile(2)
    w = psi2.profile(0).values
    assert np.array_equal(w[1:], w[:0:-1])


@pytest.mark.parametrize("k", [0, 1])
def test_psi2_moments_vanish(small_bank, k):
    assert max(r for _, r in small_bank.psi2.moment_residuals(k)) <= 1e-9


def test_sampled_calderon_sum_shapes(small_bank):
    eta, total = small_bank.psi2.sampled_calderon_sum([0, 1])
    assert eta.shape == total.shape
    assert np.all(total >= 0)


def test_flag_wavelet_is_the_partial_convolution(small_bank):
    flag = small_bank.flag(-2, 0)
    assert flag is small_bank.flag(-2, 0)
    expected = partial_convolve_t(small_bank.cube(-2), small_bank.line(0))
    assert np.array_equal(flag.values, expected.values)
    reflected = small_bank.flag_reflected(-2, 0).values
    assert np.array_equal(reflected[1:, 1:, 1:], flag.values[:0:-1, :0:-1, :0:-1])


def test_window_check(small_bank):
    small_bank.check_window([-2], [0, 1])
    with pytest.raises(ResolutionError):
        small_bank.check_window([-2, 0], [0])


def test_save_wavelet_metadata(small_bank, wavelet_spec, tmp_path):
    path = save_wavelet(tmp_path / "psi.flgw", small_bank.flag(-2, 1), wavelet_spec, j=-2, k=1)
    meta = load_metadata(path)
    assert (meta["j"], meta["k"], meta["M"]) == (-2, 1, 4)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__]))
