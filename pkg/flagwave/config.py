# Experiment Configuration
# ========================
#
# Module defaults with environment overrides, plus the INI experiment file
# ([grid] [wavelet] [kernel] [window] [flag] [ortho] [hardy] [run]) parsed into an immutable
# ExperimentConfig. Every problem is reported as ConfigError with the file
# path and the 1-based line of the offending key.
#
# Author: Yourl.Cloud Inc.

import configparser
import logging
import os
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

from .dyadic import max_refinement
from .errors import AdmissibilityError, ConfigError
from .flag_transform import ScaleWindow, check_hardy_exponent
from .grid import GridSpec
from .kernels import KernelSpec, PROFILES, cut_problem
from .maximal import check_fs_exponents
from .ortho_lab import MIN_DISTANCES, check_epsilon
from .wavelets import WaveletSpec, psi1_scale_problem, psi2_scale_problem

logger = logging.getLogger(__name__)

# Environment configuration
LOG_LEVEL = os.environ.get("FLAGWAVE_LOG_LEVEL", "INFO").upper()
NUM_THREADS = os.environ.get("FLAGWAVE_NUM_THREADS")
CALIBRATION_PATH = os.environ.get("FLAGWAVE_CALIBRATION", "calibration/default.json")

DEFAULTS: Dict[str, Dict[str, str]] = {
    "grid": {
        "n": "1",
        "half_width_z": "4.0",
        "half_width_t": "8.0",
        "points_z": "32",
        "points_t": "64",
    },
    "wavelet": {
        "M": "4",
        "r0": "0.5",
        "M2": "4",
        "min_cells_z": "5",
        "min_cells_t": "4",
    },
    "kernel": {
        "profile": "riesz_x1",
        "eps_in": "auto",
        "R_out": "auto",
        "amplitude": "1.0",
    },
    "window": {
        "j": "-1",
        "k": "-1",
        "N": "0..3",
    },
    "flag": {
        "j": "-2,-1",
        "k": "-2..0",
    },
    "ortho": {
        "j": "-2,-1.5,-1,-0.5",
    },
    "hardy": {
        "p": "1.0",
        "r": "0.9",
        "epsilon": "0.5",
    },
    "run": {
        "seed": "20240531",
        "fields": "4",
        "families": "4",
        "family_size": "8",
        "inputs": "10",
        "refine_check": "false",
    },
}

_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^=:#;\s\[][^=:]*?)\s*[=:]")


def configure_threads():
    if NUM_THREADS:
        import numba
        numba.set_num_threads(int(NUM_THREADS))
        logger.info(f"numba thread pool set to {NUM_THREADS}")


@dataclass(frozen=True)
class ExperimentConfig:
    grid: GridSpec
    wavelet: WaveletSpec
    M2: int
    kernel: KernelSpec
    window: ScaleWindow
    flag_window: ScaleWindow
    ortho_scales: Tuple[float, ...]
    p: float
    r: float
    epsilon: float
    seed: int
    fields: int
    families: int
    family_size: int
    inputs: int
    refine_check: bool = False
    source: Optional[str] = None
    line_map: Optional[Mapping[Tuple[str, str], int]] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        self.validate(self.line_map)

    def validate(self, lines: Optional[Mapping[Tuple[str, str], int]] = None):
        lines = lines or {}

        def fail(section, key, message):
            raise ConfigError(message, self.source, lines.get((section, key.lower())))

        if self.wavelet.n != self.grid.n or self.kernel.n != self.grid.n:
            fail("grid", "n", "wavelet and kernel dimension must match [grid] n")
        try:
            check_hardy_exponent(self.p, self.grid.n)
        except AdmissibilityError as e:
            fail("hardy", "p", str(e))
        try:
            check_fs_exponents(self.p, self.r, self.grid.n)
        except AdmissibilityError as e:
            fail("hardy", "r", str(e))
        try:
            check_epsilon(self.epsilon)
        except AdmissibilityError as e:
            fail("hardy", "epsilon", str(e))
        for j in self.window.j_values:
            problem = psi1_scale_problem(self.wavelet, self.grid, j)
            if problem is not None:
                fail("window", "j", f"scale j={j} is not resolvable: {problem}")
        for k in self.window.k_values:
            problem = psi2_scale_problem(self.grid, k)
            if problem is not None:
                fail("window", "k", f"scale k={k} is not resolvable: {problem}")
        deepest = max(self.window.N_values)
        for j, k in self.window.pairs():
            limit = max_refinement(j, k, self.grid)
            if limit < deepest:
                fail("window", "N", f"refinement N={deepest} is not resolvable for (j={j}, k={k}); "
                                    f"the deepest is N={limit}")
        for j in self.flag_window.j_values:
            problem = psi1_scale_problem(self.wavelet, self.grid, j)
            if problem is not None:
                fail("flag", "j", f"scale j={j} is not resolvable: {problem}")
        for k in self.flag_window.k_values:
            problem = psi2_scale_problem(self.grid, k)
            if problem is not None:
                fail("flag", "k", f"scale k={k} is not resolvable: {problem}")
        for j in self.ortho_scales:
            problem = psi1_scale_problem(self.wavelet, self.grid, j)
            if problem is not None:
                fail("ortho", "j", f"scale j={j:g} is not resolvable: {problem}")
        distances = {abs(a - b) for a in self.ortho_scales for b in self.ortho_scales}
        if len(distances) < MIN_DISTANCES:
            fail("ortho", "j", f"the scan gives {len(distances)} distinct |j-j'| values, "
                               f"the decay fit needs {MIN_DISTANCES}")
        problem = cut_problem(self.kernel, self.grid)
        if problem is not None:
            fail("kernel", "eps_in", f"kernel cuts not resolvable: {problem}")
        for name in ("fields", "families", "family_size", "inputs"):
            if getattr(self, name) < 1:
                fail("run", name, f"{name} must be a positive count")

    def with_grid_scale(self, factor: int) -> "ExperimentConfig":
        if factor == 1:
            return self
        # cuts are absolute radii, so the kernel is unchanged
        return replace(self, grid=self.grid.refine(factor))

    def with_seed(self, seed: Optional[int]) -> "ExperimentConfig":
        return self if seed is None else replace(self, seed=seed)

    def echo(self) -> Dict[str, Any]:
        return {
            "grid": self.grid.to_dict(),
            "wavelet": {"M": self.wavelet.M, "r0": self.wavelet.support_radius, "M2": self.M2,
                        "min_cells_z": self.wavelet.min_cells_z, "min_cells_t": self.wavelet.min_cells_t},
            "kernel": {"profile": self.kernel.profile, "eps_in": self.kernel.inner_cut,
                       "R_out": self.kernel.outer_cut, "amplitude": self.kernel.amplitude},
            "window": {"j": list(self.window.j_values), "k": list(self.window.k_values),
                       "N": list(self.window.N_values)},
            "flag": {"j": list(self.flag_window.j_values), "k": list(self.flag_window.k_values)},
            "ortho": {"j": list(self.ortho_scales)},
            "hardy": {"p": self.p, "r": self.r, "epsilon": self.epsilon},
            "run": {"seed": self.seed, "fields": self.fields, "families": self.families,
                    "family_size": self.family_size, "inputs": self.inputs,
                    "refine_check": self.refine_check},
        }


def _line_index(text: str) -> Dict[Tuple[str, str], int]:
    index = {}
    section = None
    for number, line in enumerate(text.splitlines(), start=1):
        match = _SECTION_RE.match(line)
        if match:
            section = match.group(1).strip()
            index[(section, "")] = number
            continue
        match = _KEY_RE.match(line)
        if match and section is not None:
            index[(section, match.group(1).strip().lower())] = number
    return index


def _parse_int_list(value: str):
    value = value.strip()
    if ".." in value:
        lo, hi = value.split("..")
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(v) for v in value.split(",") if v.strip())


def _parse_float_list(value: str):
    if ".." in value:
        return tuple(float(v) for v in _parse_int_list(value))
    return tuple(sorted({float(v) for v in value.split(",") if v.strip()}))


def _parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {value!r}")


def load_config(path: Optional[str] = None, overrides: Optional[Mapping[str, Mapping[str, str]]] = None) -> ExperimentConfig:
    """Parse an experiment file on top of DEFAULTS; ``path=None`` gives the defaults."""
    text = ""
    source = None
    if path is not None:
        source = str(path)
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise ConfigError(f"cannot read config: {e}", source)

    parser = configparser.ConfigParser(strict=True, interpolation=None)
    parser.optionxform = str.lower
    try:
        parser.read_string(text, source=source or "<defaults>")
    except configparser.DuplicateOptionError as e:
        raise ConfigError(f"duplicate key {e.option!r} in [{e.section}]", source, e.lineno)
    except configparser.DuplicateSectionError as e:
        raise ConfigError(f"duplicate section [{e.section}]", source, e.lineno)
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError("key outside of any section", source, e.lineno)
    except configparser.ParsingError as e:
        lineno = e.errors[0][0] if e.errors else None
        raise ConfigError("malformed line", source, lineno)

    lines = _line_index(text)
    values = {section: dict(keys) for section, keys in DEFAULTS.items()}
    schema = {section: {k.lower(): k for k in keys} for section, keys in DEFAULTS.items()}
    for section in parser.sections():
        if section not in DEFAULTS:
            raise ConfigError(f"unknown section [{section}]", source, lines.get((section, "")))
        for key, value in parser.items(section):
            if key not in schema[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]", source, lines.get((section, key)))
            values[section][schema[section][key]] = value
    for section, keys in (overrides or {}).items():
        for key, value in keys.items():
            values[section][key] = str(value)

    def read(section, key, convert):
        raw = values[section][key]
        try:
            return convert(raw)
        except (ValueError, TypeError) as e:
            raise ConfigError(f"bad value {raw!r} for {key} in [{section}]: {e}", source,
                              lines.get((section, key.lower())))

    try:
        grid = GridSpec(
            n=read("grid", "n", int),
            half_width_z=read("grid", "half_width_z", float),
            half_width_t=read("grid", "half_width_t", float),
            points_per_z_axis=read("grid", "points_z", int),
            points_per_t_axis=read("grid", "points_t", int),
        )
    except ValueError as e:
        raise ConfigError(str(e), source, lines.get(("grid", "")))

    try:
        wavelet = WaveletSpec(
            M=read("wavelet", "M", int),
            support_radius=read("wavelet", "r0", float),
            n=grid.n,
            min_cells_z=read("wavelet", "min_cells_z", int),
            min_cells_t=read("wavelet", "min_cells_t", int),
        )
    except ValueError as e:
        raise ConfigError(str(e), source, lines.get(("wavelet", "")))
    M2 = read("wavelet", "M2", int)
    if M2 < 1:
        raise ConfigError(f"M2 must be >= 1, got {M2}", source, lines.get(("wavelet", "m2")))

    profile = values["kernel"]["profile"].strip()
    if profile not in PROFILES or profile == "custom":
        raise ConfigError(f"kernel profile must be one of {PROFILES[:-1]}, got {profile!r}", source,
                          lines.get(("kernel", "profile")))
    eps_raw = values["kernel"]["eps_in"].strip()
    r_raw = values["kernel"]["R_out"].strip()
    try:
        auto = KernelSpec.default_for(grid)
        kernel = KernelSpec(
            profile=profile,
            inner_cut=auto.inner_cut if eps_raw == "auto" else read("kernel", "eps_in", float),
            outer_cut=auto.outer_cut if r_raw == "auto" else read("kernel", "R_out", float),
            n=grid.n,
            amplitude=read("kernel", "amplitude", float),
        )
    except ValueError as e:
        raise ConfigError(str(e), source, lines.get(("kernel", "eps_in")))

    try:
        window = ScaleWindow(
            j_values=read("window", "j", _parse_int_list),
            k_values=read("window", "k", _parse_int_list),
            N_values=read("window", "N", _parse_int_list),
        )
    except ValueError as e:
        raise ConfigError(str(e), source, lines.get(("window", "")))

    try:
        # N plays no part in the flag window
        flag_window = ScaleWindow(
            j_values=read("flag", "j", _parse_int_list),
            k_values=read("flag", "k", _parse_int_list),
            N_values=(0,),
        )
    except ValueError as e:
        raise ConfigError(str(e), source, lines.get(("flag", "")))
    ortho_scales = read("ortho", "j", _parse_float_list)
    if not ortho_scales:
        raise ConfigError("[ortho] j needs at least one scale", source, lines.get(("ortho", "j")))

    config = ExperimentConfig(
        grid=grid,
        wavelet=wavelet,
        M2=M2,
        kernel=kernel,
        window=window,
        flag_window=flag_window,
        ortho_scales=ortho_scales,
        p=read("hardy", "p", float),
        r=read("hardy", "r", float),
        epsilon=read("hardy", "epsilon", float),
        seed=read("run", "seed", int),
        fields=read("run", "fields", int),
        families=read("run", "families", int),
        family_size=read("run", "family_size", int),
        inputs=read("run", "inputs", int),
        refine_check=read("run", "refine_check", _parse_bool),
        source=source,
        line_map=lines,
    )
    logger.info(f"Loaded experiment config from {source or 'defaults'}")
    return config
