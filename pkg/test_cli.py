#!/usr/bin/env python3
"""
Command-line runner tests for flagwave.cli
"""

import csv
import json
import sys

import pytest

sys.path.insert(0, '.')

from flagwave.cli import EXIT_CONFIG, SUITE_NAMES, SuiteResult, SuiteRunner, fmt, main
from flagwave.config import load_config

SMALL_CONFIG = """\
[grid]
half_width_z = 2.0
half_width_t = 2.0
points_z = 16
points_t = 32

[wavelet]
r0 = 0.25

[window]
j = -2
k = 0,1
N = 0..2

[flag]
j = -2
k = 0,1

[ortho]
j = -2, -1.8, -1.5

[run]
seed = 3
"""


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "small.ini"
    path.write_text(SMALL_CONFIG)
    return str(path)


def test_suite_names():
    assert SUITE_NAMES == ("moments", "convolution", "reproduce", "ortho", "flag-ortho", "maximal", "bound")


def test_numbers_are_written_round_trippable():
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(3) == "3"
    assert fmt("psi1") == "psi1"


def test_config_error_exits_with_two(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[hardy]\np = 0.5\n")
    code = main(["moments", "--config", str(bad), "--out", str(tmp_path / "out")])
    assert code == EXIT_CONFIG
    assert f"{bad}:2:" in capsys.readouterr().out


def test_unknown_suite_is_rejected_by_argparse(tmp_path):
    with pytest.raises(SystemExit):
        main(["plots", "--out", str(tmp_path)])


def test_moments_suite_writes_artifacts(small_config, tmp_path):
    out = tmp_path / "out"
    calibration = tmp_path / "calibration.json"
    code = main(["moments", "-c", small_config, "-o", str(out), "--calibration", str(calibration)])
    assert code in (0, 1)
    with open(out / "moments.csv") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["component", "scale", "index", "residual"]
    assert {r[0] for r in rows[1:]} == {"psi1", "psi2"}
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["suite"] == "moments"
    assert manifest["seed"] == 3
    assert manifest["files"] == ["moments.csv"]
    assert manifest["config"]["window"]["N"] == [0, 1, 2]
    assert not calibration.exists()


def test_calibrate_writes_the_grid_block(small_config, tmp_path):
    out = tmp_path / "out"
    calibration = tmp_path / "calibration.json"
    code = main(["moments", "-c", small_config, "-o", str(out), "--calibration", str(calibration),
                 "--calibrate", "--seed", "5"])
    assert code in (0, 1)
    assert json.loads(calibration.read_text())["grid"]["points_per_z_axis"] == 16
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["calibrate"] and manifest["seed"] == 5
    assert manifest["passed"] == (code == 0)


def test_artifacts_are_byte_identical_across_runs(small_config, tmp_path):
    outputs = []
    for run in ("first", "second"):
        out = tmp_path / run
        main(["moments", "-c", small_config, "-o", str(out), "--calibration", str(tmp_path / "none.json")])
        outputs.append((out / "moments.csv").read_bytes())
    assert outputs[0] == outputs[1]


def test_uncalibrated_constant_fails_its_check(small_config, tmp_path):
    runner = SuiteRunner(load_config(small_config), str(tmp_path / "out"), str(tmp_path / "none.json"))
    runner.result = SuiteResult("bound")
    runner.check_frozen("bound ratio envelope", "bound_max_ratio", 1.0, lambda c: True, "max ratio 1")
    check = runner.result.checks[-1]
    assert not check.passed and not check.skipped
    assert "not calibrated" in check.detail
    assert not runner.result.passed


def test_calibration_records_and_checks_the_constant(small_config, tmp_path):
    runner = SuiteRunner(load_config(small_config), str(tmp_path / "out"), str(tmp_path / "c.json"), calibrate=True)
    runner.result = SuiteResult("bound")
    runner.check_frozen("bound ratio envelope", "bound_max_ratio", 2.5, lambda c: 2.5 <= 3.0 * c, "max ratio 2.5")
    assert runner.result.checks[-1].passed
    assert runner.calibration.get("bound_max_ratio") == 2.5

if __name__ == "__main__":
    sys.exit(pytest.main([__file__]))
