#!/usr/bin/env python3
"""
Shared pytest fixtures: small grids and wavelet banks that keep most tests
under a few seconds, plus the default experiment grid for the convergence tests.
"""

import sys

import pytest

sys.path.insert(0, '.')

from flagwave.grid import GridSpec  # noqa: E402
from flagwave.wavelets import WaveletBank, WaveletSpec  # noqa: E402


@pytest.fixture(scope="session")
def small_grid():
    """h_z = 1/4, h_t = 1/8; twist-aligned. psi1 lives at j = -2, psi2 at k in {0, 1}."""
    return GridSpec(n=1, half_width_z=2.0, half_width_t=2.0, points_per_z_axis=16, points_per_t_axis=32)


@pytest.fixture(scope="session")
def aligned_grid():
    """Like small_grid with L_t = 5/2, so the N = 1 sampling rectangles of (j, k) = (-2, 0) have a corner at e."""
    return GridSpec(n=1, half_width_z=2.0, half_width_t=2.5, points_per_z_axis=16, points_per_t_axis=40)


@pytest.fixture(scope="session")
def tiny_grid():
    """8^3 nodes, h_z = 1/4, h_t = 1/8, twist-aligned."""
    return GridSpec(n=1, half_width_z=1.0, half_width_t=0.5, points_per_z_axis=8, points_per_t_axis=8)


@pytest.fixture(scope="session")
def wavelet_spec():
    return WaveletSpec(M=4, support_radius=0.25)


@pytest.fixture(scope="session")
def small_bank(wavelet_spec, small_grid):
    return WaveletBank.build(wavelet_spec, 4, small_grid)


@pytest.fixture(scope="session")
def aligned_bank(wavelet_spec, aligned_grid):
    return WaveletBank.build(wavelet_spec, 4, aligned_grid)


@pytest.fixture(scope="session")
def desk_grid():
    """The default experiment grid: h_z = h_t = 1/4 on [-4, 4)^2 x [-8, 8)."""
    return GridSpec(n=1, half_width_z=4.0, half_width_t=8.0, points_per_z_axis=32, points_per_t_axis=64)


@pytest.fixture(scope="session")
def desk_spec():
    return WaveletSpec(M=4, support_radius=0.5, min_cells_z=5, min_cells_t=4)


@pytest.fixture(scope="session")
def desk_bank(desk_spec, desk_grid):
    """psi1 at j in {-2, -1}, psi2 at k in {-2, -1, 0}."""
    return WaveletBank.build(desk_spec, 4, desk_grid)
