"""End-to-end reproductions of the headline examples at full size."""

import json

import pytest

from treemax import cli
from treemax.experiments.runner import run_neg2, run_sawyer_vs_strong, run_thmneg1


@pytest.fixture(scope="module")
def sawyer_table():
    return run_sawyer_vs_strong(p=2, k=2, truncation=14, center_depth_max=8, radius_max=6, j=5, windows=(25, 50))


def test_sphere_ap_blowup_with_bounded_ms():
    table = run_thmneg1(delta=0.75, k=2, j_max=30, s=1.2)
    assert table.metadata["slope"] == pytest.approx(0.5, abs=0.1)
    assert table.metadata["ms_bound"]["verdict"] == "bounded"
    assert table.metadata["ms_bound"]["metadata"]["stabilization"] < 0.01
    assert all(abs(v) < 1e-12 for v in table.column("Q_j0_logk"))


def test_slope_shrinks_near_one_half():
    table = run_thmneg1(delta=0.55, k=2, j_max=30)
    assert table.metadata["slope"] == pytest.approx(0.1, abs=0.1)


def test_testing_condition_holds_while_strong_type_fails(sawyer_table):
    assert sawyer_table.metadata["testing_verdict"] == "bounded"
    assert sawyer_table.metadata["testing_sup"] < float("inf")
    assert 1.7 <= sawyer_table.metadata["strong_growth_ratio"] <= 2.3
    first = sawyer_table.value("value_logk", quantity="testing_running_sup", parameter=0)
    assert first == pytest.approx(0.0, abs=1e-12)


def test_neg2_matches_sawyer_weight(sawyer_table):
    neg2 = run_neg2(p=2, k=2, j=5, windows=(25, 50))
    assert neg2.metadata["growth_ratio"] == pytest.approx(sawyer_table.metadata["strong_growth_ratio"])


def test_cli_examples(capsys):
    assert cli.main([
        "check-levelwise", "--k", "2", "--p", "2", "--delta", "-1", "--weight", "power:a=1",
        "--jmax", "40", "--rmax", "40",
    ]) == cli.EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["verdict"] == "bounded"
    assert 2 ** report["empirical_sup_logk"] <= 1.5

    assert cli.main(["rho-optimize", "--p", "2", "--delta", "0", "--r", "0", "--wE", "1", "--wF", "2"]) == 0
    assert json.loads(capsys.readouterr().out)["rho"] == pytest.approx(0.0, abs=1e-12)

    assert cli.main(["exp-neg2", "--k", "2", "--p", "2", "--j", "5"]) == cli.EXIT_OK
    rows = capsys.readouterr().out.splitlines()
    assert any(row.startswith("norm_p,5,") and row.endswith(",1024") for row in rows)
