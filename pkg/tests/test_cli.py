import json
import math
import subprocess
import sys

import numpy as np
import pytest

from levyexp.cli import EXIT_CHECK_FAILED, Grid, main, parse_grid
from levyexp.errors import ValidationError
from levyexp.mellin import ExpFunctionalSpec, mellin_full
from levyexp.process import HypergeometricParams
from levyexp.verification import CheckResult

HYPER = ["--beta", "0.5", "--gamma", "0.1", "--beta-hat", "0.6", "--gamma-hat", "0.1", "--alpha", repr(math.sqrt(2))]
SPEC = ExpFunctionalSpec(HypergeometricParams(0.5, 0.1, 0.6, 0.1), math.sqrt(2))


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_grid():
    g = parse_grid("0.1:10:3")
    assert g == Grid(0.1, 10.0, 3, "log")
    np.testing.assert_allclose(g.points(), [0.1, 1.0, 10.0])
    np.testing.assert_allclose(parse_grid("0:1:3:linear", positive=False).points(), [0, 0.5, 1])


@pytest.mark.parametrize("text", ["1:2", "a:2:3", "1:2:0", "2:1:3", "1:2:3:cubic", "0:1:3"])
def test_parse_grid_rejects(text):
    with pytest.raises(ValidationError):
        parse_grid(text)


def test_csv_round_trips_full_precision(capsys):
    code, out, _ = run(["mellin", *HYPER, "--grid", "0.5:1.3:3:linear"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "s,value,imag"
    rows = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    np.testing.assert_array_equal(rows[:, 1], mellin_full(SPEC, rows[:, 0]).real)


def test_json_output(capsys, tmp_path):
    path = tmp_path / "out.json"
    code, out, _ = run(["density", *HYPER, "--grid", "0.5:2:4", "--format", "json", "--output", str(path)], capsys)
    assert code == 0 and out == ""
    doc = json.loads(path.read_text())
    assert doc["columns"] == ["x", "value"]
    assert len(doc["rows"]) == 4 and all(v > 0 for _, v in doc["rows"])


@pytest.mark.parametrize("argv", [
    ["supremum", "--alpha", "1.4142135623730951", "--rho", "0.45", "--grid", "0.5:2:2", "--cdf"],
    ["supremum", "--alpha", "1.5", "--rho", "0.5", "--grid", "0.5:2:2", "--cdf", "--method", "inversion"],
    ["lifetime", "--alpha", "1.5", "--rho", "0.5", "--grid", "0.5:2:2", "--method", "inversion"],
    ["entrance-law", "--alpha", "1.4142135623730951", "--rho", "0.45", "--grid", "0.5:2:2"],
    ["excursion-law", "--alpha", "0.7071", "--rho", "0.4", "--grid", "0.5:2:2"],
    ["lifetime", "--alpha", "0.7071", "--rho", "0.4", "--grid", "0.5:2:2"],
    ["radial-entrance", "--alpha", "1.5", "--d", "3", "--grid", "0.5:2:2", "--method", "transport"],
    ["last-passage", "--alpha", "0.7", "--d", "2", "--grid", "0.5:2:2", "--radius", "3"],
])
def test_application_commands(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 0, err
    assert len(out.strip().splitlines()) == 3


def test_simulate_flags_infinite_moments(capsys):
    code, out, _ = run(["simulate", *HYPER, "--n-paths", "500", "--grid", "1:1.5:2:linear", "--format", "json"], capsys)
    assert code == 0
    rows = json.loads(out)["rows"]
    assert rows[0][0] == 1.0 and rows[0][1] == 1.0
    assert math.isinf(rows[1][3])


def test_invalid_input_exit_code(capsys):
    code, out, err = run(["density", *HYPER, "--grid", "0:2:3"], capsys)
    assert code == 2 and out == ""
    assert json.loads(err)["error"] == "validation"
    assert run(["density", "--grid", "1:2:3"], capsys)[0] == 2


def test_numerical_failure_exit_code(capsys):
    argv = ["density", "--beta", "0.5", "--gamma", "0.1", "--beta-hat", "0.6", "--gamma-hat", "0.1",
            "--alpha", "1.5", "--method", "convergent", "--grid", "1:2:2"]
    code, _, err = run(argv, capsys)
    assert code == 3
    assert json.loads(err)["type"] == "RationalAlphaError"


def test_io_error_exit_code(capsys, tmp_path):
    code, _, err = run(["mellin", *HYPER, "--output", str(tmp_path / "missing" / "x.csv")], capsys)
    assert code == 4


def test_verify_exit_codes(capsys, monkeypatch):
    code, out, _ = run(["verify", "--suite", "psi"], capsys)
    assert code == 0 and out.count("true") == len(out.strip().splitlines()) - 1
    failing = lambda name: [CheckResult("forced", 1.0, 0.5, False, "")]
    monkeypatch.setattr("levyexp.verification.run_suite", failing)
    assert run(["verify", "--suite", "psi"], capsys)[0] == EXIT_CHECK_FAILED


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "levyexp", "mellin", *HYPER, "--grid", "1:1:1:linear"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[1].startswith("1,1,")
