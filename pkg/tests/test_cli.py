from __future__ import annotations

import json

import pytest

from annular_euler import cli
from annular_euler import dispersion as disp
from annular_euler import verify as ver
from annular_euler.errors import ConfigError


def run(argv, tmp_path, name="out"):
    out = tmp_path / name
    rc = cli.main(argv + ["--out", str(out)])
    return rc, out


def test_parsers():
    assert cli.parse_floats("0.1:0.3:0.1") == pytest.approx([0.1, 0.2, 0.3])
    assert cli.parse_floats("0.5,0.25") == [0.5, 0.25]
    assert cli.parse_ints("1:4") == [1, 2, 3, 4]
    assert cli.parse_modes("2:1e-3,3:-2e-4") == {2: 1e-3, 3: -2e-4}
    for bad in ("a", "1:2:0"):
        with pytest.raises(ConfigError):
            cli.parse_floats(bad)


def test_dispersion_is_byte_identical(tmp_path):
    argv = ["dispersion", "--k", "1,2,3", "--lambda", "0.2,0.5,0.8"]
    rc1, a = run(argv, tmp_path)
    first = {n: (a / n).read_bytes() for n in ("dispersion.csv", "dispersion.json")}
    rc2, _ = run(argv, tmp_path)
    assert rc1 == rc2 == 0
    for name, data in first.items():
        assert (a / name).read_bytes() == data
    header = (a / "dispersion.csv").read_text().splitlines()[0].split(",")
    assert header[:4] == ["k", "lambda", "gamma", "sigma_k"]
    manifest = json.loads((a / "dispersion.json").read_text())
    assert {"tool", "version", "config", "tolerances", "resolution", "files", "discrepancies"} <= set(manifest)


def test_thread_count_does_not_change_output(tmp_path, monkeypatch):
    argv = ["diagram", "--k", "1,2", "--lambda", "0.2:0.8:0.2"]
    monkeypatch.setenv(cli.THREADS_ENV, "1")
    _, a = run(argv, tmp_path, "a")
    monkeypatch.setenv(cli.THREADS_ENV, "3")
    _, b = run(argv, tmp_path, "b")
    assert (a / "diagram.csv").read_bytes() == (b / "diagram.csv").read_bytes()


def test_bad_thread_env_is_config_error(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "zero")
    rc, _ = run(["dispersion", "--k", "1", "--lambda", "0.5"], tmp_path)
    assert rc == cli.EXIT_CONFIG


def test_svg_output(tmp_path):
    rc, out = run(["diagram", "--k", "1,2", "--lambda", "0.2:0.8:0.1", "--format", "csv,svg"], tmp_path)
    assert rc == 0
    svg = (out / "diagram.svg").read_text()
    assert svg.startswith("<svg") and "<polyline" in svg


@pytest.mark.parametrize("argv", [
    ["dispersion", "--lambda", "1.5"],
    ["dispersion", "--k", "0"],
    ["stability", "--modes", "0"],
    ["verify", "--criteria", "12"],
    ["branch", "--tol", "-1"],
])
def test_config_errors_exit_2(tmp_path, argv):
    rc, _ = run(argv, tmp_path)
    assert rc == cli.EXIT_CONFIG


def test_degenerate_solve_exits_3(tmp_path, capsys):
    rc, _ = run(["stability", "--problem", "pair", "--rho", "1:1e-4", "--lambda", "0.5", "--gamma", "0"], tmp_path)
    assert rc == cli.EXIT_SOLVER
    assert "mode 1" in capsys.readouterr().err


def test_stability_run(tmp_path):
    rc, out = run(["stability", "--lambda", "0.5", "--gamma", "0", "--modes", "8"], tmp_path)
    assert rc == 0
    assert (out / "stability.csv").exists()


def test_branch_run(tmp_path):
    rc, out = run(["branch", "--lambda", "0.5", "--k", "2", "--modes", "8", "--steps", "3", "--ds", "0.005"], tmp_path)
    assert rc == 0
    rows = (out / "branch.csv").read_text().splitlines()
    assert len(rows) == 5


def test_verify_pass_and_fail_codes(tmp_path):
    rc, out = run(["verify", "--criteria", "2,5"], tmp_path, "ok")
    assert rc == 0
    rc, out = run(["verify", "--criteria", "4"], tmp_path, "bad")
    assert rc == cli.EXIT_VERIFY
    rep = json.loads((out / "verify.json").read_text())
    assert rep["passed"] is False
    assert rep["discrepancies"], "discrepancy log must be reported"


def test_mutated_dispersion_fails_verification(monkeypatch):
    good = disp.sigma_k

    def typo(k, lam, gamma):
        # a sign slip in one term of the closed form
        return good(k, lam, gamma) + 2.0 * lam ** (2 * k)

    assert ver.criterion_2().passed
    monkeypatch.setattr(disp, "sigma_k", typo)
    assert not ver.criterion_2().passed
