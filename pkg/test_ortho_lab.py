#!/usr/bin/env python3
"""
Envelope, slope fit and calibration tests for flagwave.ortho_lab
"""

import math
import sys

import numpy as np
import pytest

sys.path.insert(0, '.')

from flagwave.errors import AdmissibilityError, ResolutionError
from flagwave.grid import GridSpec
from flagwave.kernels import KernelSpec, make_kernel
from flagwave.ortho_lab import (
    Calibration,
    EnvelopeReport,
    check_epsilon,
    classify_case,
    decay_slope,
    factorization_residual,
    fit_epsilon,
    flag_bound,
    flag_envelope,
    interior_mask,
    kernel_wavelet_envelope,
    line_envelope,
    one_param_envelope,
    one_param_scan,
    wavelet_pair_envelope,
)
from flagwave.wavelets import WaveletBank, WaveletSpec, build_control_bump


def synthetic_scan(epsilon, distances):
    return [
        EnvelopeReport(0, None, d, None, "one_param", 0.5, 1.0, 3.0 * 2.0 ** (-epsilon * d), 1.0)
        for d in distances
    ]


@pytest.fixture(scope="module")
def kernel(small_grid):
    return make_kernel(KernelSpec.default_for(small_grid), small_grid)


def test_epsilon_range():
    assert check_epsilon(0.5) == 0.5
    for eps in (0.0, 1.0, -0.1):
        with pytest.raises(AdmissibilityError):
            check_epsilon(eps)


def test_case_classification():
    assert classify_case(0, 0, 0, 0) == "flag_case_geq"
    assert classify_case(-1, 0, 0, 0) == "flag_case_leq"
    assert classify_case(-1, -2, 0, 1) == "flag_case_geq"
    case, bound = flag_bound(GridSpec(), -1, 0, 0, 0)
    assert case == "flag_case_leq" and np.all(bound > 0)


def test_interior_mask(tiny_grid):
    mask = interior_mask(tiny_grid)
    assert mask.shape == tiny_grid.shape
    assert np.count_nonzero(mask) == 4 * 4 * 4
    assert not mask[1, 4, 4] and mask[2, 2, 2]


def test_fit_recovers_synthetic_rate():
    scan = synthetic_scan(0.6, range(5))
    assert decay_slope(scan) == pytest.approx(-0.6 * math.log(2.0), rel=1e-12)
    assert fit_epsilon(scan) == pytest.approx(0.6, rel=1e-12)
    # the fit does not depend on the order of the scan
    assert fit_epsilon(list(reversed(scan))) == pytest.approx(0.6, rel=1e-12)


def test_fit_accepts_half_octave_distances():
    scan = synthetic_scan(0.6, [0.0, 0.5, 1.0, 1.5])
    assert fit_epsilon(scan) == pytest.approx(0.6, rel=1e-12)
    assert scan[1].distance == 0.5


def test_fit_clamps_to_the_unit_interval():
    assert fit_epsilon(synthetic_scan(1.5, range(5))) == 1.0
    assert fit_epsilon(synthetic_scan(-0.5, range(5))) == 0.0


def test_fit_needs_four_distances():
    with pytest.raises(ResolutionError, match="at least 4"):
        fit_epsilon(synthetic_scan(0.6, [0, 1, 2, 2, 1]))


def test_one_parameter_envelopes(small_bank, kernel):
    psi = small_bank.psi1
    report = one_param_envelope(-2, -2, kernel, psi)
    assert report.case == "one_param" and report.distance == 0
    assert report.sup_ratio == report.normalized_sup
    assert report.sup_abs > 0
    pair = wavelet_pair_envelope(-2, -2, psi, psi)
    assert math.isfinite(pair.sup_ratio) and pair.sup_ratio > 0
    assert pair.row()[4] == "one_param"


def test_kernel_wavelet_envelope(small_bank, small_grid):
    spec = KernelSpec.default_for(small_grid)
    left = kernel_wavelet_envelope(-2, spec, small_bank.psi1)
    right = kernel_wavelet_envelope(-2, spec, small_bank.psi1, side="right")
    assert isinstance(left, EnvelopeReport)
    assert (left.case, right.case) == ("kernel_left", "kernel_right")
    assert left.j_p == small_bank.psi1.reference_scale
    assert left.sup_ratio > 0 and right.sup_ratio > 0
    assert left.sup_ratio == left.normalized_sup
    assert left.row()[4] == "kernel_left"
    with pytest.raises(ValueError):
        kernel_wavelet_envelope(-2, spec, small_bank.psi1, side="middle")


def test_flag_envelope_and_factorization(small_bank, kernel):
    report = flag_envelope(-2, 0, -2, 1, kernel, small_bank)
    assert report.case == "flag_case_leq"
    assert report.sup_ratio == pytest.approx(2.0 * report.normalized_sup, rel=1e-12)
    residual = factorization_residual(-2, 0, -2, 1, kernel, small_bank)
    assert math.isfinite(residual) and residual >= 0


def test_flag_envelope_geq_case(small_grid, kernel):
    # r0 = 1 puts psi1 at j = 0 on the small grid, so 2 min(j, j') >= min(k, k') for k in {0, 1}
    bank = WaveletBank.build(WaveletSpec(M=4, support_radius=1.0), 4, small_grid)
    diagonal = flag_envelope(0, 0, 0, 0, kernel, bank)
    off = flag_envelope(0, 0, 0, 1, kernel, bank)
    assert diagonal.case == off.case == "flag_case_geq"
    assert math.isfinite(diagonal.sup_ratio) and diagonal.sup_ratio > 0
    assert off.sup_ratio == pytest.approx(2.0 * off.normalized_sup, rel=1e-12)
    assert math.isfinite(off.sup_ratio) and off.sup_ratio > 0


@pytest.fixture(scope="module")
def desk_scans(desk_spec, desk_grid, desk_bank):
    K = make_kernel(KernelSpec.default_for(desk_grid), desk_grid)
    scales = (-2.0, -1.5, -1.0, -0.5)
    scan = one_param_scan(scales, K, desk_bank.psi1)
    control = one_param_scan(scales, K, build_control_bump(desk_spec, desk_grid))
    return scan, control


def test_half_octave_scan_fits_epsilon(desk_scans):
    scan, _ = desk_scans
    assert len(scan) == 16
    assert sorted({r.distance for r in scan}) == [0.0, 0.5, 1.0, 1.5]
    assert fit_epsilon(scan) >= 0.4


def test_bump_without_moments_misses_the_decay(desk_scans):
    scan, control = desk_scans
    assert decay_slope(control) > -0.5 * math.log(2.0)
    assert decay_slope(control) > decay_slope(scan)


def test_line_envelope(small_bank):
    value = line_envelope(0, 1, small_bank.psi2)
    assert math.isfinite(value) and value > 0


def test_calibration_round_trip(small_grid, tiny_grid, tmp_path):
    calibration = Calibration(constants={"C_line": 1.5}, grid=small_grid.to_dict())
    path = calibration.save(tmp_path / "calibration" / "default.json")
    loaded = Calibration.load(path)
    assert loaded.get("C_line") == 1.5
    assert loaded.get("missing") is None
    assert loaded.matches(small_grid)
    assert not loaded.matches(tiny_grid)
    assert Calibration().matches(tiny_grid)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__]))
