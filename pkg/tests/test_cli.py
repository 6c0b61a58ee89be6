import json
import math
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from uhermite import freenormal as fn
from uhermite.cli import SCHEMAS, density_grid, parse_complex, run


def _run(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _csv(text):
    return [line.split(",") for line in text.strip().splitlines()]


def test_parse_complex():
    assert parse_complex("0.3+0.2i") == 0.3 + 0.2j
    assert parse_complex("-1.5i") == -1.5j
    assert parse_complex("2") == 2
    with pytest.raises(Exception):
        parse_complex("abc")


def test_roots_figure_data(capsys):
    code, out, _ = _run(capsys, "roots", "--n", "200", "--sigma2", "1")
    assert code == 0
    rows = _csv(out)
    assert len(rows) == 200 and all(len(r) == 1 for r in rows)
    th = np.array([float(r[0]) for r in rows])
    assert np.max(np.abs(th)) <= 1.9632
    assert all(len(r[0].replace("-", "").replace(".", "").split("e")[0].lstrip("0")) <= 17 for r in rows)


@pytest.mark.parametrize("s2", [1.0, 4.0, 6.0])
def test_density_trapezoid(capsys, s2):
    code, out, _ = _run(capsys, "density", "--sigma2", str(s2), "--grid", "1000")
    rows = _csv(out)
    assert code == 0 and rows[0] == ["theta", "f"] and len(rows) == 1001
    th, f = np.array(rows[1:], dtype=float).T
    # a cube-root or square-root edge caps 1000-node trapezoid accuracy near 1.6e-6
    assert abs(np.trapezoid(f, th) - 1) <= 2e-6


@pytest.mark.parametrize("s2", [1.0, 4.0])
def test_density_trapezoid_finer_grid(s2):
    th = density_grid(s2, 2000)
    assert abs(np.trapezoid(fn.density(s2, th), th) - 1) <= 1e-6


def test_moments_table(capsys):
    code, out, _ = _run(capsys, "moments", "--n", "60", "--sigma2", "1", "--k", "5")
    rows = _csv(out)
    assert code == 0 and rows[0] == ["k", "empirical", "newton_girard", "limit"]
    vals = np.array(rows[1:], dtype=float)
    np.testing.assert_allclose(vals[:, 1], vals[:, 2], atol=1e-8)
    assert abs(vals[0, 3] - math.exp(-0.5)) <= 1e-15


def test_cw_energy_table(capsys):
    code, out, _ = _run(capsys, "cw-energy", "--beta", "0.5", "--h", "0.3", "--ns", "100", "200", "400")
    rows = _csv(out)
    assert code == 0 and rows[0] == ["n", "re", "im", "error"] and rows[1][0] == "inf"
    errs = [float(r[3]) for r in rows[2:]]
    assert errs[0] > errs[1] > errs[2]


def _schema_check(capsys, name, *argv):
    code, out, _ = _run(capsys, *argv, "--format", "json")
    assert code == 0
    payload = json.loads(out)
    jsonschema.validate(payload, SCHEMAS[name])
    return payload


def test_json_schemas(capsys, tmp_path):
    _schema_check(capsys, "roots", "roots", "--n", "20", "--sigma2", "1")
    _schema_check(capsys, "density", "density", "--sigma2", "2", "--grid", "50")
    _schema_check(capsys, "moments", "moments", "--n", "20", "--sigma2", "1", "--k", "3")
    _schema_check(capsys, "cw-zeros", "cw-zeros", "--n", "20", "--beta", "0.5")
    _schema_check(capsys, "cw-energy", "cw-energy", "--beta", "1", "--h", "0.2+0.1i", "--ns", "50")
    src = tmp_path / "p.json"
    src.write_text(json.dumps({"kind": "real", "coeffs": [0, -1, 0, 1]}))
    p = _schema_check(capsys, "heatflow", "heatflow", "--input", str(src), "--s", "0.5", "--steps", "2")
    assert len(p["roots"]) == 2 and len(p["roots"][0]) == 3
    p = _schema_check(capsys, "verify", "verify", "--only", "6")
    assert p["passed"]


def test_output_file(capsys, tmp_path):
    dest = tmp_path / "d.json"
    code, out, _ = _run(capsys, "density", "--sigma2", "2", "--grid", "20", "--format", "json", "-o", str(dest))
    assert code == 0 and out == ""
    jsonschema.validate(json.loads(dest.read_text()), SCHEMAS["density"])


def test_heatflow_inputs(capsys, tmp_path):
    trig = tmp_path / "t.json"
    a = 1.0
    trig.write_text(json.dumps({"kind": "trig", "coeffs": [[0.5, 0], [-math.cos(a), 0], [0.5, 0]]}))
    code, out, _ = _run(capsys, "heatflow", "--input", str(trig), "--s", "1", "--steps", "4")
    rows = _csv(out)
    assert code == 0 and rows[0] == ["s", "root1", "root2"] and len(rows) == 5
    s, r1, r2 = map(float, rows[-1])
    assert s == 1.0 and r2 == pytest.approx(math.acos(math.exp(-0.5) * math.cos(a)), abs=1e-12)

    from uhermite.polycore import unitary_hermite
    circ = tmp_path / "c.json"
    circ.write_text(unitary_hermite(5, 0.0).to_json())
    code, out, _ = _run(capsys, "heatflow", "--input", str(circ), "--s", "0.2", "--steps", "1")
    assert code == 0 and len(_csv(out)[1]) == 6


@pytest.mark.parametrize("argv", [
    ["roots", "--n", "0", "--sigma2", "1"],
    ["roots", "--n", "5"],
    ["density", "--sigma2", "-1"],
    ["roots", "--n", "5", "--sigma2", "1", "--working-digits", "8"],
    ["cw-energy", "--beta", "1", "--h", "0.5i"],
    ["verify", "--only", "13"],
    ["nonsense"],
])
def test_argument_errors_exit_2(capsys, argv):
    assert _run(capsys, *argv)[0] == 2


def test_computation_errors_exit_1(capsys, tmp_path):
    bad = tmp_path / "b.json"
    bad.write_text(json.dumps({"kind": "real", "coeffs": [1, 0, 1]}))  # z^2 + 1 has no real roots
    code, _, err = _run(capsys, "heatflow", "--input", str(bad), "--s", "0.1", "--steps", "1")
    assert code == 1 and "CertificationError" in err
    code, _, err = _run(capsys, "heatflow", "--input", str(tmp_path / "missing.json"), "--s", "1")
    assert code == 1
    code, _, err = _run(capsys, "moments", "--n", "3", "--sigma2", "1", "--k", "5")
    assert code == 1


def test_deterministic_output(capsys):
    a = _run(capsys, "roots", "--n", "64", "--sigma2", "4")[1]
    b = _run(capsys, "roots", "--n", "64", "--sigma2", "4")[1]
    assert a == b


def test_env_precision_override(capsys, monkeypatch):
    monkeypatch.setenv("UHERM_WORKING_DIGITS", "64")
    code, out64, _ = _run(capsys, "roots", "--n", "30", "--sigma2", "1")
    assert code == 0
    monkeypatch.setenv("UHERM_WORKING_DIGITS", "4")
    assert _run(capsys, "roots", "--n", "30", "--sigma2", "1")[0] == 2
    monkeypatch.delenv("UHERM_WORKING_DIGITS")
    out32 = _run(capsys, "roots", "--n", "30", "--sigma2", "1")[1]
    np.testing.assert_allclose(np.array(_csv(out64), float), np.array(_csv(out32), float), atol=1e-12)


def test_verify_only_exit_code(capsys):
    code, out, _ = _run(capsys, "verify", "--only", "5", "6")
    assert code == 0
    assert out.strip().splitlines()[-1] == "2/2 criteria passed"


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "uhermite.cli", "roots", "--n", "3", "--sigma2", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and len(proc.stdout.splitlines()) == 3
