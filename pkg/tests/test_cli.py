"""Tests for the command-line interface."""

import json
import os

import pytest

from treemax import cli


def _run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_every_command_is_registered():
    assert set(cli.COMMANDS) == {
        "geometry-selftest",
        "check-suffcond",
        "check-levelwise",
        "check-ap",
        "check-ms",
        "check-sawyer",
        "search-extremal",
        "exp-thmneg1",
        "exp-neg2",
        "exp-kalpha",
        "exp-a1ap",
        "exp-sawyer",
        "rho-optimize",
    }


def test_load_config_precedence(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("k = 3\np = 3.0\nweight = power:a=1\n", encoding="utf-8")
    args = cli.parse_args(["check-ap", "--config", str(path), "--p", "1.5", "--linear"])
    config = cli.load_config(args)
    assert config.k == 3
    assert config.p == 1.5
    assert config.weight == "power:a=1"
    assert config.linear is True
    assert config.verbose is False


def test_check_levelwise_report(capsys):
    code, out, _ = _run(
        capsys, "check-levelwise", "--weight", "power:a=1", "--p", "2", "--delta", "-1",
        "--jmax", "10", "--rmax", "10",
    )
    assert code == cli.EXIT_OK
    report = json.loads(out)
    assert report["condition"] == "level:levelwise"
    assert report["empirical_sup_logk"] <= 1e-9
    assert report["verdict"] == "bounded"


def test_assert_mode(capsys):
    argv = ["check-levelwise", "--weight", "power:a=1", "--delta", "-1", "--jmax", "8", "--rmax", "8",
            "--mode", "assert"]
    code, _, _ = _run(capsys, *argv, "--constant", "2")
    assert code == cli.EXIT_OK
    code, _, err = _run(capsys, *argv, "--constant", "0.5")
    assert code == cli.EXIT_VIOLATION
    assert "Assertion failed" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["check-ap"],
        ["check-ap", "--weight", "gauss"],
        ["check-levelwise", "--weight", "power:a=1", "--delta", "1.5"],
        ["check-ms", "--weight", "power:a=1", "--s", "0.5"],
        ["check-levelwise", "--weight", "power:a=1"],
        ["rho-optimize", "--delta", "0"],
        ["check-ap", "--weight", "power:a=1", "--mode", "assert"],
        ["check-ap", "--weight", "power:a=1", "--k", "1"],
        ["check-ap", "--geometry", "cube", "--weight", "power:a=1/2", "--p", "2"],
    ],
)
def test_configuration_errors_exit_2(capsys, argv):
    code, _, err = _run(capsys, *argv)
    assert code == cli.EXIT_CONFIG
    assert "treemax: " in err


def test_rho_optimize(capsys):
    code, out, _ = _run(capsys, "rho-optimize", "--p", "2", "--delta", "0", "--r", "1", "--wE", "1", "--wF", "2")
    assert code == cli.EXIT_OK
    payload = json.loads(out)
    assert payload["rho"] == pytest.approx(-1 / 3)
    assert payload["constant"] == pytest.approx(2 ** (-2 / 3) + 2 ** (1 / 3))
    assert "value_logk" in payload

    code, out, _ = _run(
        capsys, "rho-optimize", "--p", "2", "--delta", "0", "--r", "1", "--wE", "1", "--wF", "2", "--linear"
    )
    payload = json.loads(out)
    assert payload["value"] == pytest.approx(payload["bound"])


def test_experiment_writes_file(capsys, tmp_path):
    out_dir = str(tmp_path / "results")
    code, out, _ = _run(
        capsys, "exp-neg2", "--j", "3", "--windows", "10,20", "--horizon", "40", "--out", out_dir,
    )
    assert code == cli.EXIT_OK
    assert out.splitlines()[0] == "quantity,parameter,value_logk,exact"
    files = os.listdir(out_dir)
    assert len(files) == 1
    assert files[0].startswith("neg2_2_2_") and files[0].endswith(".csv")
    with open(os.path.join(out_dir, files[0]), encoding="utf-8") as f:
        assert f.read() == out


def test_json_report_file(capsys, tmp_path):
    code, _, _ = _run(
        capsys, "check-ap", "--weight", "power:a=1", "--jmax", "5", "--rmax", "5",
        "--format", "json", "--out", str(tmp_path),
    )
    assert code == cli.EXIT_OK
    (name,) = os.listdir(tmp_path)
    assert name.startswith("ap_sphere_2_2_") and name.endswith(".json")


def test_selftest_flag(capsys):
    code, _, _ = _run(capsys, "geometry-selftest", "--selftest")
    assert code == cli.EXIT_OK
    code, _, _ = _run(capsys, "rho-optimize", "--selftest")
    assert code == cli.EXIT_OK
