"""Tests for pair measures, the pairing bound and the distributional inequality."""

from fractions import Fraction

import numpy as np
import pytest

from treemax.checkers.pairs import (
    LevelSlice,
    calibrate_sum_levels,
    corsuff_pairing_bound,
    log_pair_measure,
    necessity_chain,
    pair_measure,
    pairing_constant,
    rho_grid_check,
    rho_optimize,
    slice_pair_distances,
    suffcond_ratio,
    sum_levels_corpus,
    sum_levels_violations,
)
from treemax.core.conditions import ConditionParams
from treemax.core.errors import AdmissibilityError
from treemax.core.geometry import KaryTree, Vertex
from treemax.core.weights import PowerWeight, WeightPair

SLICES = [
    LevelSlice(Vertex(()), 2),
    LevelSlice(Vertex((0,)), 3),
    LevelSlice(Vertex((1, 0)), 3),
    LevelSlice(Vertex((1, 1)), 4),
    LevelSlice(Vertex(()), 4),
]


def _random_set(rng, k, max_depth, size):
    vertices = set()
    for _ in range(size):
        depth = int(rng.integers(0, max_depth + 1))
        vertices.add(Vertex(tuple(int(d) for d in rng.integers(0, k, size=depth))))
    return frozenset(vertices)


def test_level_slice_basics(binary):
    s = LevelSlice(Vertex((1,)), 3)
    assert s.size(2) == 4
    assert s.vertices(binary) == {Vertex((1, a, b)) for a in (0, 1) for b in (0, 1)}
    assert s.contains(Vertex((1, 0, 1)))
    assert not s.contains(Vertex((0, 0, 1)))
    assert s.overlaps(LevelSlice(Vertex((1, 1)), 3))
    assert not s.overlaps(LevelSlice(Vertex((0,)), 3))
    assert LevelSlice.from_dict(s.to_dict()) == s
    with pytest.raises(ValueError):
        LevelSlice(Vertex((0, 0)), 1)


def test_slice_pair_distances_count_all_pairs(binary):
    for e in SLICES:
        for f in SLICES:
            histogram = slice_pair_distances(binary, e, f)
            assert sum(histogram.values()) == e.size(2) * f.size(2)


@pytest.mark.parametrize("k", [2, 3])
def test_slice_fast_path_matches_brute_force(k):
    tree = KaryTree(k)
    for w in (PowerWeight(1), PowerWeight(-2)):
        for e in SLICES:
            for f in SLICES:
                for r in range(9):
                    fast = pair_measure(tree, w, e, f, r, exact=True)
                    brute = pair_measure(tree, w, e.vertices(tree), f.vertices(tree), r, exact=True)
                    assert fast == brute


def test_overlapping_slices_are_rejected(binary):
    with pytest.raises(ValueError):
        pair_measure(binary, PowerWeight(1), [SLICES[0], LevelSlice(Vertex((1,)), 2)], SLICES[1], 1)


def test_log_pair_measure_and_two_weights(binary):
    e, f = SLICES[1], SLICES[2]
    w = PowerWeight(1)
    assert log_pair_measure(binary, w, e, f, 6) == pytest.approx(
        np.log2(float(pair_measure(binary, w, e, f, 6)))
    )
    pair = WeightPair(PowerWeight(2), PowerWeight(0))
    assert pair_measure(binary, pair, e, f, 4) == pair_measure(binary, PowerWeight(2), e, f, 4)


def test_suffcond_ratio(binary):
    params = ConditionParams(p=2, beta=0.5, alpha=1)
    w = PowerWeight(0)
    e = LevelSlice(Vertex(()), 3)
    # 8 x 8 pairs at distance 0, 2, 4, 6: 8, 8, 16, 32.
    expected = np.log2(32) - 6 * 0.5 - 0.5 * 3 - 0.5 * 3
    assert suffcond_ratio(binary, w, params, e, e, 6) == pytest.approx(expected)
    assert suffcond_ratio(binary, w, params, e, e, 1) == float("-inf")
    with pytest.raises(ValueError):
        suffcond_ratio(binary, w, params, frozenset(), e, 2)


def test_corsuff_pairing_bound(binary):
    assert corsuff_pairing_bound(binary, 2, 2, 2, 1.0, 1.0, 2, 0) == pytest.approx(2.0)
    assert corsuff_pairing_bound(binary, 2, 4, 2, 1.0, 1.0, 2, 0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        corsuff_pairing_bound(binary, 2, 3, 2, 1.0, 1.0, 2, 0)
    with pytest.raises(AdmissibilityError):
        corsuff_pairing_bound(binary, 2, 2, 2, 1.0, 1.0, 2, 1)


def test_pairing_constant_on_oracle_instances(binary):
    rng = np.random.default_rng(3)
    w = PowerWeight(1)
    worst = 0.0
    for _ in range(200):
        E = _random_set(rng, 2, 5, 4)
        F = _random_set(rng, 2, 5, 4)
        r = int(rng.integers(0, 7))
        worst = max(worst, pairing_constant(binary, w, E, F, r, 2, -1).constant)
    assert 0 < worst <= 2


def test_necessity_chain_holds(binary):
    rng = np.random.default_rng(11)
    w = PowerWeight(Fraction(-1, 2))
    for _ in range(30):
        E = _random_set(rng, 2, 4, 3)
        F = _random_set(rng, 2, 4, 3)
        r = int(rng.integers(0, 4))
        assert necessity_chain(binary, w, 2, E, F, r).holds
    with pytest.raises(ValueError):
        necessity_chain(binary, w, 2, frozenset(), frozenset({Vertex(())}), 1)


def test_rho_optimize_example():
    optimum = rho_optimize(2, 0, 1.0, 1.0, 2.0)
    # f(rho) = 2^{1+rho} + 2^{1.5 - rho/2}; f'(rho*) = 0 at rho* = (2 log2(2/2) - 1)/3.
    assert optimum.rho == pytest.approx(-1 / 3)
    assert optimum.constant == pytest.approx(2 ** (-2 / 3) + 2 ** (1 / 3))
    assert optimum.bound == pytest.approx(optimum.value)
    with pytest.raises(AdmissibilityError):
        rho_optimize(2, 0, 1.0, 0.0, 1.0)


def test_rho_beats_grid_search():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        p = float(rng.uniform(1.1, 4.0))
        delta = float(rng.uniform(-2.0, 0.9))
        r = float(rng.integers(0, 11))
        w_e, w_f = (float(v) for v in rng.uniform(0.1, 10.0, size=2))
        check = rho_grid_check(p, delta, r, w_e, w_f, span=5.0, step=1e-3)
        assert check.min_relative_gap >= -1e-9
        assert check.convex
        assert check.scipy_rho == pytest.approx(rho_optimize(p, delta, r, w_e, w_f).rho, abs=1e-4)


def test_sum_levels_constant_transfers(binary):
    params = ConditionParams(p=2, beta=0.5, alpha=1)
    w = PowerWeight(0)
    calibration = sum_levels_corpus(binary, range(100))
    constant = calibrate_sum_levels(binary, w, params, calibration)
    assert 0 < constant < float("inf")
    held_out = sum_levels_corpus(binary, range(100, 500))
    assert sum_levels_violations(binary, w, params, held_out, 1.1 * constant) == []
