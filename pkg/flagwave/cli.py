#!/usr/bin/env python3
"""
Flagwave Experiment Runner
==========================

Command-line entry point: ``flagwave <suite> --config <path> --out <dir>``.
Each suite builds what it needs from the experiment config, runs its
checks, writes deterministic CSV files plus ``manifest.json`` and exits with
0 (all checks pass), 1 (a check failed) or 2 (configuration error).

Author: Yourl.Cloud Inc.
"""

import argparse
import csv
import json
import logging
import math
import platform
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from . import __version__, _kernels
from .config import CALIBRATION_PATH, LOG_LEVEL, ExperimentConfig, configure_threads, load_config
from .errors import ConfigError, FlagwaveError, ResolutionError
from .flag_transform import FlagTransform, measure_reconstruction
from .grid import (
    GridSpec,
    SampledFunction,
    band_limited_field,
    convolve,
    dilate_function,
    gaussian_bump,
    integrate,
    l2_norm,
    smooth_window,
)
from .heisenberg_core import MultiIndex, apply_multi_index
from .kernels import apply, cut_problem, dilate_kernel, make_kernel, operator_norm_estimate
from .maximal import fs_vector_check, hl_maximal, strong_maximal
from .ortho_lab import (
    Calibration,
    classify_case,
    decay_slope,
    fit_epsilon,
    flag_envelope,
    kernel_wavelet_envelope,
    line_envelope,
    one_param_scan,
)
from .wavelets import WaveletBank, build_control_bump, calderon_sum, derivative_bounds

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2

SUITE_NAMES = ("moments", "convolution", "reproduce", "ortho", "flag-ortho", "maximal", "bound")
DESK_FACTOR = 3.0


def fmt(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""
    skipped: bool = False


@dataclass
class SuiteResult:
    suite: str
    checks: List[Check] = field(default_factory=list)
    files: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed or c.skipped for c in self.checks)


class SuiteRunner:
    """Runs one suite against a config and collects checks and artifacts."""

    def __init__(self, config: ExperimentConfig, out_dir: str, calibration_path: str = CALIBRATION_PATH,
                 calibrate: bool = False):
        self.config = config
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.calibrate = calibrate
        self.calibration_path = Path(calibration_path)
        self.calibration = self._load_calibration()
        self.result: Optional[SuiteResult] = None
        self._bank: Optional[WaveletBank] = None

    def _load_calibration(self) -> Calibration:
        if self.calibration_path.exists():
            calibration = Calibration.load(self.calibration_path)
            if not calibration.matches(self.config.grid):
                logger.warning(f"Calibration {self.calibration_path} was frozen on another grid; ignoring it")
                return Calibration(grid=self.config.grid.to_dict())
            return calibration
        return Calibration(grid=self.config.grid.to_dict())

    @property
    def grid(self) -> GridSpec:
        return self.config.grid

    @property
    def bank(self) -> WaveletBank:
        if self._bank is None:
            self._bank = WaveletBank.build(self.config.wavelet, self.config.M2, self.grid)
            self._bank.check_window(self.config.window.j_values, self.config.window.k_values)
        return self._bank

    # Bookkeeping

    def check(self, name: str, passed: bool, detail: str = ""):
        self.result.checks.append(Check(name, bool(passed), detail))
        glyph = "✅" if passed else "❌"
        print(f"{glyph} {name}: {detail}")

    def skip(self, name: str, reason: str):
        self.result.checks.append(Check(name, True, reason, skipped=True))
        logger.warning(f"Skipped {name}: {reason}")

    def frozen(self, name: str, measured: float) -> Optional[float]:
        """Calibrated constant for this grid, or None. Calibration records the measurement and returns it."""
        if self.calibrate:
            self.calibration.constants[name] = measured
            return measured
        return self.calibration.get(name)

    def check_frozen(self, name: str, constant: str, measured: float, test: Callable[[float], bool], detail: str):
        """A check against a calibrated constant; a missing constant fails the check."""
        value = self.frozen(constant, measured)
        if value is None:
            self.check(name, False, f"{detail}; {constant} is not calibrated for this grid, run with --calibrate")
            return
        self.check(name, test(value), f"{detail} against {constant}={value:.4e}")

    def write_csv(self, name: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> Path:
        path = self.out_dir / name
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([fmt(v) for v in row])
        self.result.files.append(name)
        logger.info(f"Wrote {path}")
        return path

    def write_manifest(self):
        versions = {"python": platform.python_version(), "flagwave": __version__, "numpy": np.__version__}
        for module in ("scipy", "numba"):
            versions[module] = __import__(module).__version__
        manifest = {
            "suite": self.result.suite,
            "config": self.config.echo(),
            "seed": self.config.seed,
            "calibrate": self.calibrate,
            "versions": versions,
            "checks": [asdict(c) for c in self.result.checks],
            "passed": self.result.passed,
            "files": self.result.files,
        }
        with open(self.out_dir / "manifest.json", "w") as handle:
            json.dump(manifest, handle, indent=2, sort_keys=True)
            handle.write("\n")

    def run(self, suite: str) -> SuiteResult:
        handlers: Dict[str, Callable[[], None]] = {
            "moments": self.run_moments,
            "convolution": self.run_convolution,
            "reproduce": self.run_reproduce,
            "ortho": self.run_ortho,
            "flag-ortho": self.run_flag_ortho,
            "maximal": self.run_maximal,
            "bound": self.run_boundedness_scan,
        }
        if suite not in handlers:
            raise ValueError(f"unknown suite {suite!r}; expected one of {SUITE_NAMES}")
        self.result = SuiteResult(suite)
        logger.info(f"Running suite {suite} on grid {self.grid.shape}")
        handlers[suite]()
        if self.calibrate:
            self.calibration.grid = self.grid.to_dict()
            self.calibration.save(self.calibration_path)
        self.write_manifest()
        return self.result

    # Suites

    def run_moments(self):
        bank = self.bank
        rows = []
        worst1 = 0.0
        for j in self.config.window.j_values:
            for index, residual in bank.psi1.moment_residuals(j):
                rows.append(["psi1", j, ":".join(str(i) for i in index.i), residual])
                worst1 = max(worst1, residual)
        worst2 = 0.0
        for k in self.config.window.k_values:
            for gamma, residual in bank.psi2.moment_residuals(k):
                rows.append(["psi2", k, gamma, residual])
                worst2 = max(worst2, residual)
        self.write_csv("moments.csv", ["component", "scale", "index", "residual"], rows)
        self.check("psi1 moments", worst1 <= 1e-10, f"max relative residual {worst1:.3e}")
        self.check("psi2 moments", worst2 <= 1e-10, f"max relative residual {worst2:.3e}")

        eta = np.geomspace(2.0 ** -3, 2.0 ** 3, 2049)
        gap = float(np.max(np.abs(calderon_sum(eta, range(-3, 4)) - 1.0)))
        self.check("Calderon sum", gap <= 1e-6, f"max |sum - 1| over the band {gap:.3e}")
        _, sampled = bank.psi2.sampled_calderon_sum(self.config.window.k_values)
        logger.info(f"sampled Calderon sum over the window: max {float(np.max(sampled)):.4f}")

        worst_d = max(derivative_bounds(bank.psi1, j) for j in self.config.window.j_values)
        self.check("psi1 derivative bounds", worst_d <= 10.0, f"max scaled derivative ratio {worst_d:.3f}")

    def _smooth_pair(self, grid: GridSpec):
        radius = 0.5 * min(grid.half_width_z, math.sqrt(grid.half_width_t))
        sides = np.array([radius] * (grid.d - 1) + [radius * radius])

        def profile(center):
            def fn(coords):
                shifted = coords - np.asarray(center)
                return np.prod(smooth_window(shifted / sides), axis=-1) * (1.0 + shifted[..., 0])
            return fn

        shift = 0.25 * radius
        f1 = SampledFunction.from_callable(grid, profile([shift, 0.0, 0.0] + [0.0] * (grid.d - 3)))
        f2 = SampledFunction.from_callable(grid, profile([0.0, -shift, 0.0] + [0.0] * (grid.d - 3)))
        return f1, f2

    def _identity_errors(self, grid: GridSpec) -> List[float]:
        f1, f2 = self._smooth_pair(grid)
        base = convolve(f1, f2)
        errors = []
        for axis in range(grid.d):
            index = MultiIndex(tuple(1 if a == axis else 0 for a in range(grid.d)))
            lhs = apply_multi_index(index, base)
            rhs = convolve(f1, apply_multi_index(index, f2))
            errors.append(l2_norm(lhs - rhs) / l2_norm(lhs))
        return errors

    def run_convolution(self):
        rows = []
        coarse = self._identity_errors(self.grid)
        rows += [["invariance", axis + 1, "base", e] for axis, e in enumerate(coarse)]
        self.check("X(f1*f2) = f1*(Xf2)", max(coarse) <= 0.05, f"max relative L2 error {max(coarse):.3e}")
        if self.config.refine_check:
            fine = self._identity_errors(self.grid.refine(2))
            rows += [["invariance", axis + 1, "refined", e] for axis, e in enumerate(fine)]
            gain = min(c / f for c, f in zip(coarse, fine) if f > 0)
            self.check("refinement gain", gain >= 2.0, f"smallest error reduction factor {gain:.2f}")
        else:
            self.skip("refinement gain", "refine_check is off")

        oracle_grid = GridSpec(n=1, half_width_z=1.0, half_width_t=1.0, points_per_z_axis=8, points_per_t_axis=8)
        rng = np.random.default_rng(self.config.seed)
        f = SampledFunction(oracle_grid, rng.normal(size=oracle_grid.shape))
        g = SampledFunction(oracle_grid, rng.normal(size=oracle_grid.shape))
        exact = True
        for summation in ("left", "right"):
            compiled = convolve(f, g, summation=summation).values.ravel()
            reference = _python_convolution(f, g, summation)
            exact = exact and bool(np.array_equal(compiled, reference))
        rows.append(["oracle", 0, "8x8x8", 0.0 if exact else 1.0])
        self.check("compiled convolution matches the pure-Python kernel", exact, "bit-exact on 8^3")

        bump = gaussian_bump(self.grid, 3.0 * self.grid.h_z, 6.0 * self.grid.h_t)
        compressed = dilate_function(2.0, bump)
        mass = abs(integrate(compressed) - integrate(bump)) / integrate(bump)
        round_trip = l2_norm(dilate_function(0.5, compressed) - bump) / l2_norm(bump)
        rows += [["dilation", 0, "mass", mass], ["dilation", 0, "round_trip", round_trip]]
        self.check("D_2 preserves mass", mass <= 1e-3, f"relative mass change {mass:.3e}")
        self.check("D_1/2 D_2 round trip", round_trip <= 0.05, f"relative L2 error {round_trip:.3e}")
        self.write_csv("convolution.csv", ["check", "field", "grid", "value"], rows)

    def _fields(self, count: int, offset: int = 0) -> List[SampledFunction]:
        return [band_limited_field(self.grid, self.config.seed + offset + i) for i in range(count)]

    def run_reproduce(self):
        window = self.config.window
        transform = FlagTransform(self.bank, window)
        fields = [transform.calibration_field(self.config.seed + i) for i in range(self.config.fields)]
        transform.fit_global_scale(fields, max(window.N_values))

        rows = measure_reconstruction(transform, fields, window.N_values)
        self.write_csv("recon.csv", ["N", "error", "error_vs_f"], rows)
        errors = [e for _, e, _ in rows]
        ratios = [b / a for a, b in zip(errors, errors[1:]) if a > 0]
        if ratios:
            self.check("error(N+1)/error(N) <= 0.7", max(ratios) <= 0.7, f"max ratio {max(ratios):.3f}")
        bumps = [b / a - 1.0 for a, b in zip(errors, errors[1:]) if b > a]
        self.check("monotone decrease in N", len(bumps) == 0 or (len(bumps) == 1 and bumps[0] <= 0.05),
                   f"{len(bumps)} non-monotone steps")

        if 3 in window.N_values:
            j, k = window.j_values[-1], window.k_values[-1]
            block = transform.single_atom(j, k, 3, 0).blocks[(j, k)]
            coords = self.grid.node_coords(block.anchors)
            ordinal = int(np.argmin(np.sum(coords ** 2, axis=-1)))
            atom = transform.synthesize(transform.single_atom(j, k, 3, ordinal))
            atom_error = transform.sampling_error(atom, 3)
            self.check("single-atom reconstruction at N=3", atom_error <= 0.05, f"relative error {atom_error:.3e}")
        else:
            self.skip("single-atom reconstruction at N=3", "N=3 is outside the window")

        square = [l2_norm(transform.square_function(f)) / l2_norm(f) for f in fields]
        lo, hi = min(square), max(square)
        self.check_frozen("square-function ratio floor", "square_ratio_min", lo,
                          lambda c: lo >= c / DESK_FACTOR, f"smallest ratio {lo:.4e}")
        self.check_frozen("square-function ratio ceiling", "square_ratio_max", hi,
                          lambda c: hi <= c * DESK_FACTOR, f"largest ratio {hi:.4e}")

        corner = transform.with_anchor_mode("corner")
        spread = 1.0
        for f in fields:
            a, b = transform.hp_norm(f, self.config.p), corner.hp_norm(f, self.config.p)
            spread = max(spread, a / b, b / a) if a > 0 and b > 0 else math.inf
        self.check("centre vs corner anchors", spread <= 2.0, f"max H^p ratio {spread:.3f}")

    def run_ortho(self):
        grid = self.grid
        K = make_kernel(self.config.kernel, grid)
        scales = self.config.ortho_scales
        eps = self.config.epsilon
        scan = one_param_scan(scales, K, self.bank.psi1, eps)
        control = one_param_scan(scales, K, build_control_bump(self.config.wavelet, grid), eps)

        diag = max(r.sup_ratio for r in scan if r.j == r.j_p)
        worst = max(r.sup_ratio for r in scan)
        self.check_frozen("one-parameter envelope", "C_star", diag, lambda c: worst <= DESK_FACTOR * c,
                          f"max sup ratio {worst:.4e}")
        pairs = {(r.j, r.j_p): r.sup_ratio for r in scan}
        asym = max(max(a / pairs[(jp, j)], pairs[(jp, j)] / a) for (j, jp), a in pairs.items() if a > 0)
        self.check("(j, j') symmetry", asym <= 2.0, f"max ratio {asym:.3f}")

        slope = None
        try:
            slope = decay_slope(scan)
            eps_hat = fit_epsilon(scan)
            self.check("fitted epsilon >= 0.4", eps_hat >= 0.4, f"eps_hat={eps_hat:.3f}")
            control_slope = decay_slope(control)
            self.check("negative control misses the slope threshold", control_slope > -0.5 * math.log(2.0),
                       f"control slope {control_slope:.3f}")
        except ResolutionError as e:
            self.check("fitted epsilon >= 0.4", False, str(e))
            self.check("negative control misses the slope threshold", False, str(e))

        self.write_csv("ortho.csv", ["j", "k", "j_p", "k_p", "case", "epsilon", "sup_ratio", "slope"],
                       [r.row(slope) for r in scan])

        rows = []
        left_values = []
        j0 = self.bank.psi1.reference_scale
        for j in range(j0 - 3, j0 + 4):
            problem = cut_problem(dilate_kernel(self.config.kernel, 2.0 ** (j0 - j)), self.grid)
            if problem is not None:
                logger.warning(f"Kernel envelope at j={j} skipped: {problem}")
                continue
            left = kernel_wavelet_envelope(j, self.config.kernel, self.bank.psi1, "left").sup_ratio
            right = kernel_wavelet_envelope(j, self.config.kernel, self.bank.psi1, "right").sup_ratio
            rows.append([j, left, right])
            left_values.append(left)
            if left > 0 and right > 0:
                self.check(f"left/right kernel envelope j={j}", max(left / right, right / left) <= 2.0,
                           f"left {left:.4e}, right {right:.4e}")
        if len(left_values) < 2:
            self.skip("kernel envelope flat in j", "fewer than two kernel dilates resolvable")
        else:
            spread = max(left_values) / min(left_values) if min(left_values) > 0 else math.inf
            self.check("kernel envelope flat in j", spread <= DESK_FACTOR, f"spread {spread:.3f}")
        self.write_csv("kernel_wavelet.csv", ["j", "left", "right"], rows)

    def run_flag_ortho(self):
        K = make_kernel(self.config.kernel, self.grid)
        flag = self.config.flag_window
        self.bank.check_window(flag.j_values, flag.k_values)
        pairs = flag.pairs()
        eps = self.config.epsilon
        reports = [flag_envelope(j, k, jp, kp, K, self.bank, eps) for j, k in pairs for jp, kp in pairs]
        diag = max(r.sup_ratio for r in reports if r.j == r.j_p and r.k == r.k_p)
        self.write_csv("flag_ortho.csv", ["j", "k", "j_p", "k_p", "case", "epsilon", "sup_ratio", "slope"],
                       [r.row() for r in reports])
        cases = sorted({r.case for r in reports})
        self.check("flag scan coverage", len(reports) >= 12 and len(cases) == 2,
                   f"{len(reports)} tuples in cases {cases}")
        for case in ("flag_case_geq", "flag_case_leq"):
            members = [r for r in reports if r.case == case]
            if not members:
                self.check(f"{case} envelope", False, "no tuple of the flag window falls in this case")
                continue
            worst = max(r.sup_ratio for r in members)
            self.check_frozen(f"{case} envelope", "C_flag", diag, lambda c: worst <= DESK_FACTOR * c,
                              f"{len(members)} tuples, max sup ratio {worst:.4e}")

        ks = flag.k_values
        self.write_csv("line.csv", ["k", "k_p", "sup_ratio"],
                       [[k, kp, line_envelope(k, kp, self.bank.psi2)] for k in ks for kp in ks])

    def run_maximal(self):
        grid = self.grid
        f = band_limited_field(grid, self.config.seed)
        hl = hl_maximal(f)
        strong = strong_maximal(f)
        self.check("Mf >= |f|", bool(np.all(hl.values >= np.abs(f.values))), "Hardy-Littlewood, pointwise")
        self.check("strong >= Hardy-Littlewood", bool(np.all(strong.values >= hl.values)), "pointwise")
        doubled = hl_maximal(f * 2.0)
        self.check("M(2f) = 2 Mf", bool(np.array_equal(doubled.values, 2.0 * hl.values)), "exact")

        rows = []
        ratios = []
        for family_index in range(self.config.families):
            offset = 1000 * (family_index + 1)
            family = self._fields(self.config.family_size, offset)
            report = fs_vector_check(family, self.config.p, self.config.r)
            rows.append([family_index, report.family_size, report.p, report.r, report.ratio])
            ratios.append(report.ratio)
        self.write_csv("maximal.csv", ["family", "size", "p", "r", "ratio"], rows)
        finite = all(math.isfinite(r) for r in ratios)
        spread = max(ratios) / min(ratios) if min(ratios) > 0 else math.inf
        self.check("Fefferman-Stein ratio stable", finite and spread <= 2.0, f"spread {spread:.3f}")
        top = max(ratios)
        self.check_frozen("Fefferman-Stein ratio envelope", "fs_ratio_max", top,
                          lambda c: top <= DESK_FACTOR * c, f"max ratio {top:.4e}")

    def _bound_inputs(self, grid: GridSpec, bank: WaveletBank, transform: FlagTransform):
        inputs = []
        atoms = self.config.inputs // 2
        window = self.config.window
        pairs = window.pairs()
        N = min(window.N_values)
        for i in range(atoms):
            j, k = pairs[i % len(pairs)]
            coeffs = transform.single_atom(j, k, N, 0)
            count = coeffs.blocks[(j, k)].values.size
            ordinal = (count // 2 + 7 * i) % count
            inputs.append(("atom", transform.synthesize(transform.single_atom(j, k, N, ordinal))))
        for i in range(self.config.inputs - atoms):
            inputs.append(("field", band_limited_field(grid, self.config.seed + 500 + i)))
        return inputs

    def _bound_ratios(self, config: ExperimentConfig) -> List[tuple]:
        grid = config.grid
        bank = self.bank if grid == self.grid else WaveletBank.build(config.wavelet, config.M2, grid)
        transform = FlagTransform(bank, config.window)
        K = make_kernel(config.kernel, grid)
        rows = []
        for i, (kind, f) in enumerate(self._bound_inputs(grid, bank, transform)):
            base = transform.hp_norm(f, config.p)
            ratio = transform.hp_norm(apply(K, f, config.kernel), config.p) / base if base > 0 else 0.0
            rows.append((i, kind, ratio))
        return rows

    def run_boundedness_scan(self):
        """ratio_i = ||T f_i||_{H^p} / ||f_i||_{H^p}; pass iff max <= 3 x median (and refinement-stable)."""
        rows = self._bound_ratios(self.config)
        self.write_csv("bound.csv", ["input", "kind", "ratio"], rows)
        ratios = np.array([r for _, _, r in rows])
        top, median = float(np.max(ratios)), float(np.median(ratios))
        self.check("max <= 3 x median", top <= DESK_FACTOR * median,
                   f"max {top:.4e}, median {median:.4e} over {len(rows)} inputs")
        self.check_frozen("bound ratio envelope", "bound_max_ratio", top,
                          lambda c: top <= DESK_FACTOR * c, f"max ratio {top:.4e}")

        fields = self._fields(self.config.fields)
        c_op = float(np.median(operator_norm_estimate(make_kernel(self.config.kernel, self.grid), fields)))
        self.check_frozen("operator norm estimate within 30%", "C_op", c_op,
                          lambda c: abs(c_op - c) <= 0.3 * c, f"median estimate {c_op:.4e}")

        if self.config.refine_check:
            fine = self._bound_ratios(self.config.with_grid_scale(2))
            fine_top = max(r for _, _, r in fine)
            drift = abs(fine_top - top) / top if top > 0 else 0.0
            self.check("refinement stability", drift <= 0.3, f"max ratio moves by {drift:.1%}")
        else:
            self.skip("refinement stability", "boundedness refinement not measured (refine_check is off)")


def _python_convolution(f: SampledFunction, g: SampledFunction, summation: str) -> np.ndarray:
    """The gather kernel run through its pure-Python twin."""
    grid = f.grid
    src, dense = (f, g) if summation == "left" else (g, f)
    flat = np.flatnonzero(src.values)
    shape, strides, lo, step = grid._layout()
    values = _kernels.gather_convolution.py_func(
        np.ascontiguousarray(src.values.ravel()[flat], dtype=float),
        np.ascontiguousarray(-grid.node_coords(flat)),
        summation == "left",
        np.ascontiguousarray(dense.values, dtype=float).ravel(),
        shape, strides, lo, step,
        np.ascontiguousarray(grid.node_coords()),
        grid.n,
    )
    return values * grid.cell_volume


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="flagwave",
                                     description="Flag Littlewood-Paley experiments on the Heisenberg group")
    parser.add_argument("suite", choices=SUITE_NAMES, help="Suite to run")
    parser.add_argument("--config", "-c", help="Experiment file (INI); defaults apply when omitted")
    parser.add_argument("--out", "-o", required=True, help="Output directory for CSV/JSON artifacts")
    parser.add_argument("--seed", type=int, help="Override [run] seed")
    parser.add_argument("--grid-scale", type=int, choices=[1, 2], default=1,
                        help="Multiply points per axis with the box fixed")
    parser.add_argument("--calibrate", action="store_true", help="Freeze constants instead of asserting")
    parser.add_argument("--calibration", default=CALIBRATION_PATH, help="Calibration file")
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=getattr(logging, LOG_LEVEL, logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    configure_threads()

    try:
        config = load_config(args.config).with_seed(args.seed).with_grid_scale(args.grid_scale)
    except ConfigError as e:
        print(f"❌ {e}")
        return EXIT_CONFIG

    runner = SuiteRunner(config, args.out, args.calibration, args.calibrate)
    try:
        result = runner.run(args.suite)
    except FlagwaveError as e:
        print(f"❌ {args.suite} aborted: {e}")
        return EXIT_FAIL

    if result.passed:
        print(f"✅ {args.suite}: all checks passed ({len(result.checks)} checks)")
        return EXIT_PASS
    failed = [c.name for c in result.checks if not (c.passed or c.skipped)]
    print(f"❌ {args.suite}: {len(failed)} check(s) failed: {', '.join(failed)}")
    return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
