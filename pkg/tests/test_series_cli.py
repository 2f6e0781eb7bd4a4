import io
import subprocess
import sys

import numpy as np
import pytest

from kickedtop import ContractError
from kickedtop.cli import ArgumentError, main, parse_angle, parse_spin
from kickedtop.series import MeasureSeries, read_table, series_from_csv, series_to_csv, write_table


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def body(text):
    return [line for line in text.splitlines() if not line.startswith("#")]


# ---------------------------------------------------------------- series / CSV


def test_series_round_trip():
    rng = np.random.RandomState(3)
    axis = np.cumsum(rng.uniform(0.01, 1, 50))
    vals = rng.standard_normal(50) * 1e3
    s = MeasureSeries("GE", "k", axis, vals, fixed_params={"j": "3/2", "m": 10}, seed=7, extra={"theta": 0.5})
    back = series_from_csv(series_to_csv(s))
    # 15 significant digits: half a unit in the last place is at most 5e-15 relative
    np.testing.assert_allclose(back.axis, axis, rtol=5e-15, atol=0)
    np.testing.assert_allclose(back.values, vals, rtol=5e-15, atol=0)
    assert back.measure_id == "GE" and back.seed == 7
    assert back.fixed_params["j"] == "3/2" and back.fixed_params["theta"] == 0.5


def test_write_table_format():
    buf = io.StringIO()
    write_table(buf, ["a", "b"], [(1, 1 / 3), (2, np.float64(2.0))], {"x": [1, 2], "s": "t"})
    lines = buf.getvalue().splitlines()
    assert lines[:2] == ["# x = [1, 2]", '# s = "t"']
    assert lines[2] == "a,b"
    assert lines[3] == "1,0.333333333333333"
    meta, cols, data = read_table(io.StringIO(buf.getvalue()))
    assert meta == {"x": [1, 2], "s": "t"} and cols == ["a", "b"] and data.shape == (2, 2)


def test_series_validation():
    with pytest.raises(ContractError):
        MeasureSeries("XX", "k", [0, 1], [0, 1])
    with pytest.raises(ContractError):
        MeasureSeries("LE", "k", [0, 1], [0])
    with pytest.raises(ContractError):
        MeasureSeries("LE", "k", [1, 0], [0, 1])
    with pytest.raises(ContractError):
        MeasureSeries("LE", "k", [0, 1], [0, np.nan])
    with pytest.raises(ContractError):
        read_table(io.StringIO("# only = 1\n"))
    with pytest.raises(ContractError):
        series_from_csv("a,b,c\n1,2,3\n")


# ---------------------------------------------------------------- literal parsing


@pytest.mark.parametrize("text,want", [
    ("pi/4", np.pi / 4), ("3*pi/2", 1.5 * np.pi), ("2pi", 2 * np.pi), ("-pi", -np.pi),
    ("0.785", 0.785), ("1/3", 1 / 3), ("pi/2 + 0.1", np.pi / 2 + 0.1), ("π/3", np.pi / 3),
])
def test_parse_angle(text, want):
    assert parse_angle(text) == pytest.approx(want, rel=1e-15)


def test_parse_angle_spin_symbol():
    assert parse_angle("N*pi/2+0.1", twice_j=40) == pytest.approx(20 * np.pi + 0.1)
    assert parse_angle("40pi/2", twice_j=40) == parse_angle("N*pi/2", twice_j=40)


@pytest.mark.parametrize("bad", ["pi*pi", "pi/0", "1/pi", "import os", "foo", "pi**2", "N", "True"])
def test_parse_angle_rejects(bad):
    with pytest.raises(ArgumentError):
        parse_angle(bad)


def test_parse_spin():
    assert parse_spin("3/2").twice_j == 3
    assert parse_spin("2").twice_j == 4
    with pytest.raises(ArgumentError):
        parse_spin("2/3")


# ---------------------------------------------------------------- CLI


def test_quasi_table(capsys):
    code, out, _ = run(["quasi", "--j", "2", "--alpha", "pi/4", "--k", "2.1", "--deterministic"], capsys)
    assert code == 0
    rows = body(out)
    assert rows[0] == "phase_index,phase"
    phases = [float(r.split(",")[1]) for r in rows[1:]]
    np.testing.assert_allclose(phases, [-1.2947, -0.2641, 0.6478, 0.7806, 1.16346], atol=2e-3)


def test_time_series_and_check_period_pipeline(tmp_path, capsys):
    out = tmp_path / "le.csv"
    code, _, _ = run(["echo", "--j", "1", "--k-start", "0", "--k-stop", "8pi", "--k-step", "pi/60",
                      "--m", "10", "--dk", "0.1", "--out", str(out)], capsys)
    assert code == 0
    s = series_from_csv(out.read_text())
    assert s.measure_id == "LE" and len(s) == 480
    code, txt, _ = run(["check-period", "--input", str(out), "--j", "1", "--divisors", "2,3,4,6"], capsys)
    assert code == 0
    rows = dict(r.split(",", 1) for r in body(txt)[1:])
    assert rows["verdict"] == "pass"
    assert float(rows["minimal_period"]) == pytest.approx(4 * np.pi)


def test_check_period_constant_series(tmp_path, capsys):
    path = tmp_path / "c.csv"
    path.write_text("# measure = \"OTOC\"\nk,value\n" + "".join(f"{0.1 * i!r},0.5\n" for i in range(40)))
    code, txt, _ = run(["check-period", "--input", str(path), "--kappa", "1"], capsys)
    assert code == 0 and "verdict,pass" in txt


def test_deterministic_output_is_byte_identical(tmp_path, capsys):
    argv = ["ge", "--j", "3/2", "--k", "3.0", "--m-max", "30", "--deterministic"]
    _, a, _ = run(argv, capsys)
    _, b, _ = run(argv, capsys)
    assert a == b and "generated" not in a
    _, c, _ = run(argv[:-1], capsys)
    assert "# generated" in c


def test_metadata_records_parameters(capsys):
    _, out, _ = run(["otoc", "--j", "2", "--k", "1", "--m-max", "3", "--w-seed", "9", "--deterministic"], capsys)
    assert '# w_seed = 9' in out and '# prng = "numpy.RandomState' in out
    assert "# kappa_j = 25.13274" in out


def test_out_dir_env(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("KICKEDTOP_OUT_DIR", str(tmp_path / "sub"))
    code, _, _ = run(["quasi", "--j", "1", "--k", "1", "--out", "q.csv"], capsys)
    assert code == 0 and (tmp_path / "sub" / "q.csv").exists()


def test_other_subcommands(capsys):
    code, out, _ = run(["classical", "--k", "3", "--n-init", "2", "--n-iter", "5", "--deterministic"], capsys)
    assert code == 0 and body(out)[0] == "theta,phi" and len(body(out)) == 11
    code, out, _ = run(["classical", "--k", "3", "--n-init", "1", "--n-iter", "4", "--coords", "xyz"], capsys)
    assert code == 0 and body(out)[0] == "X,Y,Z"
    code, out, _ = run(["special-k", "--j", "2", "--m-max", "12", "--deterministic"], capsys)
    assert code == 0 and body(out)[0] == "m,otoc,ge,oe" and len(body(out)) == 14
    code, out, _ = run(["reflection", "--j", "3/2", "--dk", "0.1", "--m", "5"], capsys)
    assert code == 0 and "verdict,pass" in out
    code, out, _ = run(["sweep-k", "--measure", "oe", "--j", "1", "--k-start", "0", "--k-stop", "1",
                        "--k-step", "0.25", "--m", "4"], capsys)
    assert code == 0 and len(body(out)) == 5
    for measure in ("otoc", "echo", "ge", "oe"):
        argv = [measure, "--j", "1", "--k", "2", "--m-max", "4"] + (["--dk", "0.1"] if measure == "echo" else [])
        code, out, _ = run(argv, capsys)
        assert code == 0 and len(body(out)) == 6


@pytest.mark.parametrize("argv", [
    ["quasi", "--j", "2"],
    ["quasi", "--j", "2/3", "--k", "1"],
    ["quasi", "--j", "2", "--k", "pi*pi"],
    ["otoc", "--j", "2", "--k", "1", "--m-max", "-1"],
    ["otoc", "--j", "2", "--k", "1", "--m-max", "3", "--w-seed", "-4"],
    ["echo", "--j", "2", "--k", "1", "--m-max", "3"],
    ["echo", "--j", "2", "--k-start", "0", "--k-stop", "1", "--k-step", "0.1", "--m", "2"],
    ["otoc", "--j", "2", "--k-start", "1", "--k-stop", "0", "--k-step", "0.1", "--m", "2"],
    ["otoc", "--j", "2", "--k-start", "0", "--k-stop", "1"],
    ["nonsense"],
])
def test_argument_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as info:
        code = main(argv)
        raise SystemExit(code)
    assert info.value.code == 2


def test_contract_failures_exit_1(tmp_path, capsys):
    path = tmp_path / "s.csv"
    path.write_text("k,value\n" + "".join(f"{0.1 * i!r},{float(np.sin(i))!r}\n" for i in range(40)))
    code, _, err = run(["check-period", "--input", str(path), "--kappa", "1.05"], capsys)
    assert code == 1 and "AlignmentError" in err
    code, _, err = run(["check-period", "--input", str(path), "--kappa", "1", "--divisors", "2"], capsys)
    assert code == 1 and "InvariantViolation" in err
    code, _, _ = run(["check-period", "--input", str(tmp_path / "missing.csv"), "--kappa", "1"], capsys)
    assert code == 1
    code, _, _ = run(["ge", "--j", "1", "--k", "1", "--m-max", "2", "--theta", "4"], capsys)
    assert code == 1


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "kickedtop", "quasi", "--j", "1/2", "--k", "1", "--deterministic"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and "phase_index,phase" in res.stdout
