"""Sawyer-type testing condition for the ball maximal operator.

For a ball B, the testing ratio is ∫_B M(χ_B σ)^p w / σ(B) with σ = w^{-1/(p-1)}.
M(χ_B σ) is evaluated on the infinite tree through the sparse path, so spheres
leaving the truncation only enter through their closed-form cardinality.
"""

import math
from typing import Any, Dict, Iterable, Sequence, Tuple, Union

from absl import logging

from treemax.checkers.registry import TESTING, condition_registry
from treemax.core.conditions import BaseCondition, ConditionParams, ConditionReport, build_report
from treemax.core.geometry import KaryTree, Vertex
from treemax.core.operators import SparseFunction, maximal_ball
from treemax.core.weights import AnyWeight, LevelWeight, as_pair, as_weight
from treemax.utils.numeric import NEG_INF, Number, logk


def _level_weight(weight: AnyWeight) -> LevelWeight:
    w = as_weight(weight)
    if not w.is_level:
        raise ValueError("The testing condition is scanned for level weights only")
    return w.base


def ball_center(depth: int, digit: int = 0) -> Vertex:
    """The vertex (digit, digit, ..., digit) of the given depth."""
    return Vertex((digit,) * depth)


def ball_testing_integral(
    tree: KaryTree, w: LevelWeight, p: Number, ball: Iterable[Vertex]
) -> Tuple[float, float]:
    """log_k of ∫_B M(χ_B σ)^p w and of σ(B) for a finite vertex set B."""
    w = _level_weight(w)
    sigma = w.dual(p)
    ball = list(ball)
    f = SparseFunction({y: sigma.value(y.depth, tree.k) for y in ball})
    p = float(p)
    numerator = math.fsum(
        maximal_ball(tree, f, y).value ** p * w.value(y.depth, tree.k) for y in ball
    )
    denominator = math.fsum(f.support.values())
    return logk(numerator, tree.k), logk(denominator, tree.k)


def ball_testing_ratio(
    tree: KaryTree, w: LevelWeight, p: Number, center: Vertex, radius: int
) -> float:
    """log_k of the testing ratio of B(center, radius)."""
    ball = tree.enumerate_ball(center, radius, center.depth + radius)
    numerator, denominator = ball_testing_integral(tree, w, p, ball)
    return numerator - denominator


def sawyer_testing_constant(
    tree: KaryTree,
    w: AnyWeight,
    p: Number,
    center_depths: Union[int, Sequence[int]] = 8,
    radii: Union[int, Sequence[int]] = 6,
    truncation_depth: int = 14,
    center_digit: int = 0,
) -> ConditionReport:
    """max of the testing ratio over balls B(x, R), x = (digit,)*c.

    `center_depths` and `radii` are either explicit lists or inclusive upper
    bounds. Balls reaching below `truncation_depth` are skipped, not clipped.
    """
    params = ConditionParams(p=p)
    w = _level_weight(w)
    if not 0 <= center_digit < tree.k:
        raise ValueError(f"Center digit {center_digit} out of range for k={tree.k}")
    if isinstance(center_depths, int):
        center_depths = range(center_depths + 1)
    if isinstance(radii, int):
        radii = range(radii + 1)
    center_depths, radii = sorted(center_depths), sorted(radii)
    tree.check_budget(truncation_depth)

    per_radius = []
    rejected = []
    best, witness = NEG_INF, {}
    for radius in radii:
        radius_best = NEG_INF
        for depth in center_depths:
            if depth + radius > truncation_depth:
                rejected.append({"center_depth": depth, "radius": radius})
                continue
            ratio = ball_testing_ratio(tree, w, p, ball_center(depth, center_digit), radius)
            logging.debug(f"Testing ratio at depth {depth}, radius {radius}: {ratio:.6g} (log_k)")
            radius_best = max(radius_best, ratio)
            if ratio > best:
                best, witness = ratio, {"center_depth": depth, "radius": radius, "digit": center_digit}
        per_radius.append(radius_best)
    if rejected:
        logging.warning(f"Skipped {len(rejected)} balls reaching past truncation depth {truncation_depth}")

    report = build_report(
        TESTING + "sawyer",
        tree,
        params,
        {
            "center_depths": list(center_depths),
            "radii": list(radii),
            "truncation_depth": truncation_depth,
            "center_digit": center_digit,
            "weight": w.descriptor(),
        },
        per_radius,
        witness,
        metadata={"rejected_balls": rejected},
    )
    logging.info(f"Testing constant: sup={report.empirical_sup:.6g} verdict={report.verdict}")
    return report


@condition_registry.register(TESTING + "sawyer")
class SawyerCondition(BaseCondition):
    """∫_B M(χ_B σ)^p w ≲ σ(B) over a family of balls."""

    condition_id = TESTING + "sawyer"

    def __init__(self, weights, p, center_depths=8, radii=6, truncation_depth=14, center_digit=0):
        ConditionParams(p=p)
        self._weight = as_pair(weights).u
        self._p = p
        self._center_depths = center_depths
        self._radii = radii
        self._truncation_depth = truncation_depth
        self._center_digit = center_digit

    def get_condition_args(self) -> Dict[str, Any]:
        return {
            "p": self._p,
            "center_depths": self._center_depths,
            "radii": self._radii,
            "truncation_depth": self._truncation_depth,
            "center_digit": self._center_digit,
        }

    def check(self, tree: KaryTree) -> ConditionReport:
        return sawyer_testing_constant(
            tree,
            self._weight,
            self._p,
            self._center_depths,
            self._radii,
            self._truncation_depth,
            self._center_digit,
        )

    def evaluate_witness(self, tree: KaryTree, witness: Dict[str, Any]) -> float:
        center = ball_center(witness["center_depth"], witness["digit"])
        return ball_testing_ratio(tree, _level_weight(self._weight), self._p, center, witness["radius"])
