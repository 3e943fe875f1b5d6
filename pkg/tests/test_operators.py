"""Tests for sphere and ball averages and the maximal operators."""

from fractions import Fraction

import numpy as np
import pytest

from treemax.core.errors import HorizonError
from treemax.core.geometry import KaryTree, Vertex
from treemax.core.operators import (
    LevelFunction,
    MaximalValue,
    SparseFunction,
    ball_average,
    level_sphere_average,
    log_lp_mass,
    lp_norm,
    maximal,
    maximal_ball,
    maximal_ball_level_profile,
    maximal_level_profile,
    maximal_sphere,
    oracle_ball_average,
    oracle_maximal,
    oracle_sphere_average,
    pair_sum,
    series_norm_sum,
    sphere_average,
    sphere_average_levels,
    superlevel_bound,
    weak_profile,
)
from treemax.checkers.pairs import pair_measure
from treemax.core.weights import PowerWeight


def _random_vertex(rng, k, max_depth):
    depth = int(rng.integers(0, max_depth + 1))
    return Vertex(tuple(int(d) for d in rng.integers(0, k, size=depth)))


def _random_sparse(rng, k, max_depth=3, max_points=3):
    support = {}
    for _ in range(int(rng.integers(1, max_points + 1))):
        support[_random_vertex(rng, k, max_depth)] = int(rng.integers(1, 5))
    return SparseFunction(support)


@pytest.mark.parametrize("k", [2, 3])
def test_averages_of_constants_are_one(k):
    tree = KaryTree(k)
    g = LevelFunction.constant(12)
    for j in range(13):
        for r in range(13 - j):
            assert level_sphere_average(tree, g, j, r, exact=True) == 1


@pytest.mark.parametrize("k", [2, 3])
def test_level_sparse_and_oracle_paths_agree(k):
    tree = KaryTree(k)
    g = LevelFunction((1, 0, 3, 2))
    sparse = SparseFunction.from_level(tree, g)
    for j in range(5):
        x = Vertex((k - 1,) * j)
        for r in range(6):
            level = level_sphere_average(tree, g, j, r, exact=True)
            assert sphere_average(tree, sparse, x, r, exact=True) == level
            assert oracle_sphere_average(tree, g, x, r) == level
            assert ball_average(tree, g, x, r, exact=True) == oracle_ball_average(tree, g, x, r)
        oracle = oracle_maximal(tree, g, x).value
        assert maximal_sphere(tree, g, x, exact=True).value == oracle
        assert maximal_sphere(tree, sparse, x, exact=True).value == oracle
        assert maximal_ball(tree, g, x, exact=True).value == oracle_maximal(tree, g, x, "ball").value


def test_sparse_path_matches_oracle_on_random_instances():
    rng = np.random.default_rng(7)
    for k in (2, 3):
        tree = KaryTree(k)
        for _ in range(100):
            f = _random_sparse(rng, k)
            x = _random_vertex(rng, k, 3)
            r = int(rng.integers(0, 4))
            assert sphere_average(tree, f, x, r, exact=True) == oracle_sphere_average(tree, f, x, r)
            assert ball_average(tree, f, x, r, exact=True) == oracle_ball_average(tree, f, x, r)
            assert maximal_sphere(tree, f, x, exact=True).value == oracle_maximal(tree, f, x).value


def test_operator_identities_on_random_instances():
    rng = np.random.default_rng(0)
    w = PowerWeight(1)
    for index in range(1000):
        k = 2 if index % 2 else 3
        tree = KaryTree(k)
        f = _random_sparse(rng, k)
        g = _random_sparse(rng, k)
        x = _random_vertex(rng, k, 4)
        r = int(rng.integers(0, 5))

        ball_max = maximal_ball(tree, f, x, exact=True).value
        sphere_max = maximal_sphere(tree, f, x, exact=True).value
        assert ball_max <= sphere_max <= 3 * ball_max

        one = LevelFunction.constant(x.depth + r)
        assert sphere_average(tree, one, x, r, exact=True) == 1

        left = sum(v * pair_sum(tree, g, y, r) for y, v in f.support.items())
        right = sum(v * pair_sum(tree, f, y, r) for y, v in g.support.items())
        assert left == right

        E, F = frozenset(f.support), frozenset(g.support)
        weighted = SparseFunction({y: w.exact_value(y.depth, k) for y in F})
        expected = sum(
            (tree.sphere_size(e.depth, r) * sphere_average(tree, weighted, e, r, exact=True) for e in E),
            Fraction(0),
        )
        assert pair_measure(tree, w, E, F, r, exact=True) == expected


def test_maximal_radius_of_a_point_mass(binary):
    f = SparseFunction({Vertex(()): 1})
    x = Vertex((0, 0, 0))
    assert maximal_sphere(binary, f, x, exact=True) == MaximalValue(Fraction(1, 12), 3)
    assert maximal_ball(binary, f, x, exact=True) == MaximalValue(Fraction(1, 22), 3)
    assert maximal(binary, f, x, "ball", exact=True) == maximal_ball(binary, f, x, exact=True)


def test_maximal_level_profile_is_constant_on_levels(binary):
    g = LevelFunction.indicator(2)
    profile = maximal_level_profile(binary, g, 6, exact=True)
    assert profile(2) == 1
    for j in range(7):
        y = Vertex((1,) * j)
        assert profile(j) == maximal_sphere(binary, g, y, exact=True).value


def test_ball_profile_below_sphere_profile(binary):
    g = LevelFunction((0, 2, 1))
    sphere = maximal_level_profile(binary, g, 6, exact=True)
    ball = maximal_ball_level_profile(binary, g, 6, exact=True)
    assert ball(1) == 2
    assert all(ball(j) <= sphere(j) for j in range(7))


def test_superlevel_bound_dominates_profile(binary):
    g = LevelFunction((0, 2, 1))
    profile = maximal_level_profile(binary, g, 20)
    for level in range(3, 20):
        bound = superlevel_bound(binary, g, level)
        assert all(profile(i) <= bound + 1e-15 for i in range(level, 21))
    with pytest.raises(ValueError):
        superlevel_bound(binary, g, 2)


def test_lp_mass_of_a_level_indicator(binary):
    f = LevelFunction.indicator(5)
    assert log_lp_mass(binary, f, PowerWeight(1), 2) == 10.0
    assert lp_norm(binary, f, PowerWeight(1), 2) == 5.0
    sparse = SparseFunction.from_level(binary, f)
    assert log_lp_mass(binary, sparse, PowerWeight(1), 2) == pytest.approx(10.0, abs=1e-12)


def test_sphere_average_levels_shape(binary):
    g = LevelFunction.indicator(3)
    averaged = sphere_average_levels(binary, g, 2)
    assert len(averaged.values) == 6
    assert averaged(3) == pytest.approx(level_sphere_average(binary, g, 3, 2))
    assert sphere_average_levels(binary, LevelFunction(()), 4).values == ()


def test_series_of_sphere_averages_converges(binary):
    series = series_norm_sum(binary, LevelFunction.indicator(3), PowerWeight(Fraction(-3, 4)), 2, 60)
    assert series.converged
    assert series.tail_increment < 0.01
    assert len(series.log_partial_sums) == 61
    assert list(series.log_partial_sums) == sorted(series.log_partial_sums)


def test_series_beyond_horizon(binary):
    with pytest.raises(HorizonError):
        series_norm_sum(binary, LevelFunction.indicator(3), PowerWeight(-1), 2, 60, level_horizon=40)


def test_weak_profile_horizon(binary):
    g = LevelFunction.indicator(5)
    with pytest.raises(HorizonError):
        weak_profile(binary, g, PowerWeight(1), 2, horizon=5)
    profile = weak_profile(binary, g, PowerWeight(1), 2, horizon=40)
    assert not profile.diverged
    assert profile.log_weak_pth_power == pytest.approx(2 * profile.log_sup)


def test_invalid_functions_and_kinds(binary):
    with pytest.raises(ValueError):
        LevelFunction((1, -1))
    with pytest.raises(ValueError):
        SparseFunction({Vertex(()): -2})
    with pytest.raises(ValueError):
        maximal(binary, LevelFunction.indicator(1), Vertex(()), "cube")


@pytest.mark.parametrize("k", range(2, 9))
def test_sphere_maximal_within_three_ball_maximal(k):
    rng = np.random.default_rng(k)
    tree = KaryTree(k)
    for _ in range(150):
        f = _random_sparse(rng, k)
        x = _random_vertex(rng, k, 4)
        ball_max = maximal_ball(tree, f, x, exact=True).value
        sphere_max = maximal_sphere(tree, f, x, exact=True).value
        assert ball_max <= sphere_max <= 3 * ball_max


def test_averages_and_maximal_functions_are_monotone():
    rng = np.random.default_rng(11)
    for index in range(300):
        k = 2 + index % 3
        tree = KaryTree(k)
        f = _random_sparse(rng, k)
        larger = dict(f.support)
        for y, v in _random_sparse(rng, k).support.items():
            larger[y] = larger.get(y, 0) + v
        for y in f.support:
            larger[y] += int(rng.integers(0, 3))
        g = SparseFunction(larger)
        x = _random_vertex(rng, k, 4)
        r = int(rng.integers(0, 6))
        assert sphere_average(tree, f, x, r, exact=True) <= sphere_average(tree, g, x, r, exact=True)
        assert ball_average(tree, f, x, r, exact=True) <= ball_average(tree, g, x, r, exact=True)
        assert maximal_sphere(tree, f, x, exact=True).value <= maximal_sphere(tree, g, x, exact=True).value
        assert maximal_ball(tree, f, x, exact=True).value <= maximal_ball(tree, g, x, exact=True).value


def test_weak_functional_of_a_level_indicator_is_comparable_to_its_norm(binary):
    g = LevelFunction.indicator(5)
    w = PowerWeight(1)
    log_norm = log_lp_mass(binary, g, w, 2)
    profile = weak_profile(binary, g, w, 2, horizon=100, kind="sphere")
    assert not profile.diverged
    # ‖g‖² / 4 <= sup_λ λ² w({M∘g > λ}) <= 4 ‖g‖²
    assert abs(profile.log_weak_pth_power - log_norm) <= 2.0
    assert profile.log_weak_pth_power >= log_norm - 1e-9
