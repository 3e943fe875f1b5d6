"""Tests for the level-wise, A_p and M_s checkers."""

from fractions import Fraction

import pytest

from treemax.checkers.levels import (
    ApCondition,
    LevelwiseCondition,
    MsCondition,
    ap_constant,
    levelwise_condition_sup,
    log_ap_product,
    ms_bound,
    ms_log_ratio,
)
from treemax.core.errors import HorizonError
from treemax.core.geometry import KaryTree, Vertex
from treemax.core.weights import PowerWeight, Weight, WeightPair


@pytest.mark.parametrize("k", [2, 3])
@pytest.mark.parametrize("p", [Fraction(3, 2), 2, 3])
def test_levelwise_condition_of_power_weight(k, p):
    tree = KaryTree(k)
    report = levelwise_condition_sup(tree, PowerWeight(p - 1), p, 1 - p, j_max=40, r_max=40)
    assert report.empirical_sup <= 1 + 1 / k
    assert report.verdict == "bounded"
    assert report.condition == "level:levelwise"


def test_levelwise_witness_reproduces_sup(binary):
    condition = LevelwiseCondition(PowerWeight(Fraction(1, 2)), 2, Fraction(1, 2), j_max=10, r_max=10)
    report = condition.check(binary)
    assert condition.evaluate_witness(binary, report.witness) == report.empirical_sup_logk
    assert report.witness["i"] == report.witness["j"] + report.witness["r"] - 2 * report.witness["m"]
    assert condition.get_condition_args() == {"p": 2, "delta": Fraction(1, 2), "j_max": 10, "r_max": 10}


def test_diagonal_pair_reduces_to_one_weight(binary):
    w = PowerWeight(1)
    single = levelwise_condition_sup(binary, w, 2, -1, j_max=8, r_max=8)
    paired = levelwise_condition_sup(binary, WeightPair(w, w), 2, -1, j_max=8, r_max=8)
    assert paired.to_dict() == single.to_dict()


def test_level_checkers_reject_vertex_overrides(binary):
    w = Weight(PowerWeight(1), {Vertex((0,)): 3.0})
    with pytest.raises(ValueError):
        levelwise_condition_sup(binary, w, 2, -1, j_max=2, r_max=2)


def test_ap_constant_of_constant_weight(binary):
    for geometry in ("sphere", "ball"):
        report = ap_constant(binary, PowerWeight(0), 2, geometry, j_max=10, r_max=10)
        assert report.empirical_sup_logk == pytest.approx(0.0, abs=1e-12)
        assert report.verdict == "bounded"


def test_sphere_ap_product_grows_on_the_diagonal(binary):
    report = ap_constant(binary, PowerWeight(Fraction(-3, 4)), 2, "sphere", j_max=20, r_max=20)
    assert report.verdict == "growing"
    diagonal = [log_ap_product(binary, PowerWeight(Fraction(-3, 4)), 2, j, j) for j in range(21)]
    assert diagonal[20] - diagonal[10] == pytest.approx(10 * 0.5, abs=0.2)


def test_ap_constant_of_a_pair_depends_on_the_order(binary):
    pair = WeightPair(PowerWeight(1), PowerWeight(0))
    forward = ap_constant(binary, pair, 2, "sphere", j_max=10, r_max=10)
    backward = ap_constant(binary, pair.swapped(), 2, "sphere", j_max=10, r_max=10)
    assert forward.verdict == "growing"
    assert backward.verdict == "bounded"
    assert backward.empirical_sup_logk == pytest.approx(0.0, abs=1e-12)
    assert forward.empirical_sup_logk > backward.empirical_sup_logk + 5


@pytest.mark.parametrize("geometry", ["sphere", "ball"])
def test_ap_product_matches_its_dual_formulation(binary, geometry):
    w, p = PowerWeight(Fraction(-1, 2)), 3
    sigma, dual_p = w.dual(p), Fraction(3, 2)
    assert sigma.dual(dual_p) == w
    for j in range(6):
        for r in range(6):
            assert log_ap_product(binary, w, p, j, r, geometry) == pytest.approx(
                (p - 1) * log_ap_product(binary, sigma, dual_p, j, r, geometry), abs=1e-9
            )
    primal = ap_constant(binary, w, p, geometry, j_max=8, r_max=8)
    dual = ap_constant(binary, sigma, dual_p, geometry, j_max=8, r_max=8)
    assert primal.empirical_sup_logk == pytest.approx((p - 1) * dual.empirical_sup_logk, abs=1e-9)


def test_ap_witness_matches_direct_product(binary):
    for geometry in ("sphere", "ball"):
        condition = ApCondition(PowerWeight(Fraction(-1, 2)), 3, geometry, j_max=8, r_max=8)
        report = condition.check(binary)
        assert condition.evaluate_witness(binary, report.witness) == pytest.approx(
            report.empirical_sup_logk, abs=1e-9
        )
    with pytest.raises(ValueError):
        ApCondition(PowerWeight(0), 2, "cube")


def test_ms_bound_of_constant_weight(binary):
    report = ms_bound(binary, PowerWeight(0), 3, j_max=20)
    assert report.empirical_sup == pytest.approx(1.0, abs=1e-9)


def test_ms_bound_of_decaying_power_weight(binary):
    report = ms_bound(binary, PowerWeight(Fraction(-3, 4)), Fraction(6, 5), j_max=200)
    assert report.verdict == "bounded"
    assert report.metadata["stabilization"] < 0.01
    assert report.grid["horizon"] == 601
    assert ms_log_ratio(binary, PowerWeight(Fraction(-3, 4)), Fraction(6, 5), 0, 0) == 0.0


def test_ms_witness_matches_closed_form(binary):
    condition = MsCondition(PowerWeight(Fraction(-1, 2)), Fraction(3, 2), j_max=30)
    report = condition.check(binary)
    assert condition.evaluate_witness(binary, report.witness) == pytest.approx(
        report.empirical_sup_logk, abs=1e-9
    )


def test_ms_bound_horizon_errors(binary):
    with pytest.raises(HorizonError):
        ms_bound(binary, PowerWeight(Fraction(-1, 2)), 2, j_max=20, horizon=30)
    with pytest.raises(HorizonError):
        ms_bound(binary, PowerWeight(1), 2, j_max=10)
