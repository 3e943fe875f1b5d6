"""Tests for the extremal-set search."""

import pytest

from treemax.checkers.pairs import LevelSlice, suffcond_ratio
from treemax.checkers.search import (
    ExtremalCondition,
    SuffCondCondition,
    extremal_search,
    witness_sets,
)
from treemax.core.conditions import ConditionParams, levelwise_pair_exponents
from treemax.core.geometry import Vertex
from treemax.core.weights import PowerWeight, Weight


def test_level_slice_search_of_the_kalpha_weight(binary):
    params = levelwise_pair_exponents(2, -1)
    report = extremal_search(binary, PowerWeight(1), params, depth=5, families=("slices",))
    assert report.verdict == "bounded"
    assert report.witness["kind"] == "slices"
    assert report.grid["r_max"] == 10
    assert not report.grid["budget_exhausted"]


def test_pair_exponents_below_the_threshold_are_violated(binary):
    params = ConditionParams(p=2, beta=0.4, alpha=0.4)
    report = extremal_search(binary, PowerWeight(1), params, depth=5, families=("slices",))
    # E = T_5, F = T_0 at r = 5 gives r(1 - alpha - beta).
    assert report.empirical_sup_logk >= 1.0 - 1e-9


def test_slice_ratio_grows_with_the_radius_below_the_threshold(binary):
    params = ConditionParams(p=2, beta=0.4, alpha=0.4)
    w = PowerWeight(0)
    depth = 6
    report = extremal_search(binary, w, params, depth=depth, r_max=depth, families=("slices",))
    assert report.verdict == "growing"
    # E = T_r, F = T_0 at radius r gives r(1 - beta - alpha/p).
    root = Vertex(())
    explicit = [
        suffcond_ratio(binary, w, params, [LevelSlice(root, r)], [LevelSlice(root, 0)], r)
        for r in range(depth + 1)
    ]
    assert explicit == pytest.approx([0.4 * r for r in range(depth + 1)], abs=1e-9)
    assert all(b > a for a, b in zip(explicit, explicit[1:]))
    curve = report.running_sup_logk
    assert len(curve) == depth + 1
    assert all(b >= a for a, b in zip(curve, curve[1:]))
    assert all(c >= e - 1e-9 for c, e in zip(curve, explicit))
    assert curve[-1] > curve[0] + 2.0


def test_full_search_is_deterministic(binary):
    params = ConditionParams(p=2, beta=0.5, alpha=1)
    w = PowerWeight(0)
    first = extremal_search(binary, w, params, depth=3, seed=5)
    second = extremal_search(binary, w, params, depth=3, seed=5)
    assert first.to_dict() == second.to_dict()
    assert first.grid["families"] == ["slices", "sphere", "random", "greedy"]


def test_witness_reproduces_reported_value(binary):
    params = ConditionParams(p=2, beta=0.5, alpha=1)
    condition = ExtremalCondition(PowerWeight(0), params, depth=3, seed=1)
    report = condition.check(binary)
    assert condition.evaluate_witness(binary, report.witness) == pytest.approx(
        report.empirical_sup_logk, abs=1e-9
    )
    E, F, r = witness_sets(report.witness)
    assert suffcond_ratio(binary, PowerWeight(0), params, E, F, r) == pytest.approx(
        report.empirical_sup_logk, abs=1e-9
    )


def test_budget_is_enforced(binary):
    params = ConditionParams(p=2, beta=0.5, alpha=1)
    report = extremal_search(binary, PowerWeight(0), params, budget=5, depth=3)
    assert report.grid["evaluations"] == 5
    assert report.grid["budget_exhausted"]


def test_non_level_weights_use_all_vertices(binary):
    params = ConditionParams(p=2, beta=0.5, alpha=1)
    w = Weight(PowerWeight(0), {Vertex((1,)): 4.0}, truncation=2)
    report = extremal_search(binary, w, params, depth=2, families=("slices", "sphere"))
    assert report.empirical_sup_logk > float("-inf")


def test_suffcond_condition_scans_slices(binary):
    params = levelwise_pair_exponents(2, -1)
    report = SuffCondCondition(PowerWeight(1), params, depth=4).check(binary)
    assert report.condition == "pair:suffcond"
    assert report.grid["families"] == ["slices"]


def test_unknown_family(binary):
    with pytest.raises(ValueError):
        extremal_search(binary, PowerWeight(0), ConditionParams(p=2, beta=0.5, alpha=1), families=("grid",))
