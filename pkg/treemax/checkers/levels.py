"""Checkers for conditions that only involve level weights.

Every quantity here depends on a vertex only through its depth, so each scan
runs over (j, r) grids with closed-form sphere level counts.
"""

import math
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from absl import logging
from scipy.special import logsumexp

from treemax.checkers.registry import LEVEL, condition_registry
from treemax.core.conditions import BaseCondition, ConditionParams, ConditionReport, build_report
from treemax.core.errors import HorizonError
from treemax.core.geometry import KaryTree
from treemax.core.weights import (
    AnyWeight,
    LevelWeight,
    WeightPair,
    as_pair,
    as_weight,
    ball_weight,
    sphere_weight,
)
from treemax.utils.numeric import NEG_INF, Number, k_pow, logk, logk_sum

GEOMETRIES = ("sphere", "ball")


def _level_base(weight: AnyWeight) -> LevelWeight:
    w = as_weight(weight)
    if not w.is_level:
        raise ValueError("Level checkers need level weights without vertex overrides")
    return w.base


def _level_pair(weights: Union[AnyWeight, WeightPair]) -> Tuple[LevelWeight, LevelWeight]:
    pair = as_pair(weights)
    return _level_base(pair.u), _level_base(pair.v)


def _descriptor(weights: Union[AnyWeight, WeightPair]) -> Dict[str, str]:
    u, v = _level_pair(weights)
    if u == v:
        return {"weight": u.descriptor()}
    return {"u": u.descriptor(), "v": v.descriptor()}


# Level-wise condition


def levelwise_log_ratio(
    tree: KaryTree, weights: Union[AnyWeight, WeightPair], p: Number, delta: Number, j: int, r: int, m: int
) -> float:
    """log_k of u(T_i ∩ S(x, r)) / (k^{(r-m)(p-δ)} k^{rδ} v(x)) for x ∈ T_j, i = j + r - 2m."""
    u, v = _level_pair(weights)
    i = j + r - 2 * m
    return (
        tree.log_sphere_level_count(j, r, m)
        + u.log_phi(i)
        - ((r - m) * float(p - delta) + r * float(delta))
        - v.log_phi(j)
    )


def levelwise_condition_sup(
    tree: KaryTree,
    weights: Union[AnyWeight, WeightPair],
    p: Number,
    delta: Number,
    j_max: int = 40,
    r_max: int = 40,
) -> ConditionReport:
    """sup over j ≤ j_max, r ≤ r_max and valid m of the level-wise ratio.

    With a WeightPair (u, v), u measures the level piece and v the center.
    """
    params = ConditionParams(p=p, delta=delta)
    per_level = []
    best, witness = NEG_INF, {}
    for j in range(j_max + 1):
        level_best = NEG_INF
        for r in range(r_max + 1):
            for m in range(min(r, j) + 1):
                value = levelwise_log_ratio(tree, weights, p, delta, j, r, m)
                if value > level_best:
                    level_best = value
                if value > best:
                    best, witness = value, {"j": j, "i": j + r - 2 * m, "r": r, "m": m}
        per_level.append(level_best)
    report = build_report(
        LEVEL + "levelwise",
        tree,
        params,
        {"j_max": j_max, "r_max": r_max, **_descriptor(weights)},
        per_level,
        witness,
    )
    logging.info(f"Level-wise condition: sup={report.empirical_sup:.6g} verdict={report.verdict}")
    return report


# A_p over spheres and balls


def log_ap_product(
    tree: KaryTree, weights: Union[AnyWeight, WeightPair], p: Number, j: int, r: int, geometry: str = "sphere"
) -> float:
    """log_k of avg(u)·avg(σ_v)^{p-1} over S(x, r) or B(x, r), x ∈ T_j."""
    u, v = _level_pair(weights)
    sigma = v.dual(p)
    if geometry == "sphere":
        measure, log_size = sphere_weight, tree.log_sphere_size(j, r)
    elif geometry == "ball":
        measure, log_size = ball_weight, tree.log_ball_size(j, r)
    else:
        raise ValueError(f"Unknown geometry {geometry!r}; expected one of {GEOMETRIES}")
    return (measure(tree, u, j, r) - log_size) + float(p - 1) * (measure(tree, sigma, j, r) - log_size)


def ap_constant(
    tree: KaryTree,
    weights: Union[AnyWeight, WeightPair],
    p: Number,
    geometry: str = "sphere",
    j_max: int = 40,
    r_max: int = 40,
) -> ConditionReport:
    """sup over (j, r) of the A_p product over spheres or balls."""
    params = ConditionParams(p=p)
    if geometry not in GEOMETRIES:
        raise ValueError(f"Unknown geometry {geometry!r}; expected one of {GEOMETRIES}")
    u, v = _level_pair(weights)
    sigma = v.dual(p)
    ln_k = math.log(tree.k)
    per_level = []
    best, witness = NEG_INF, {}
    for j in range(j_max + 1):
        log_u = np.asarray([sphere_weight(tree, u, j, r) for r in range(r_max + 1)])
        log_s = np.asarray([sphere_weight(tree, sigma, j, r) for r in range(r_max + 1)])
        if geometry == "sphere":
            log_size = np.asarray([tree.log_sphere_size(j, r) for r in range(r_max + 1)])
        else:
            log_u = np.logaddexp.accumulate(log_u * ln_k) / ln_k
            log_s = np.logaddexp.accumulate(log_s * ln_k) / ln_k
            log_size = np.asarray([tree.log_ball_size(j, r) for r in range(r_max + 1)])
        products = (log_u - log_size) + float(p - 1) * (log_s - log_size)
        r_best = int(np.argmax(products))
        per_level.append(float(products[r_best]))
        if products[r_best] > best:
            best, witness = float(products[r_best]), {"j": j, "r": r_best}
    report = build_report(
        LEVEL + "ap",
        tree,
        params,
        {"geometry": geometry, "j_max": j_max, "r_max": r_max, **_descriptor(weights)},
        per_level,
        witness,
    )
    logging.info(f"A_p ({geometry}): sup={report.empirical_sup:.6g} verdict={report.verdict}")
    return report


def ap_diagonal(tree: KaryTree, w: LevelWeight, p: Number, j_max: int, geometry: str = "sphere"):
    """log_k Q(j, j) for j = 0..j_max."""
    return [log_ap_product(tree, w, p, j, j, geometry) for j in range(j_max + 1)]


# M_s w ≲ w


def _log_sphere_sizes(tree: KaryTree, j: int, radii: np.ndarray) -> np.ndarray:
    k = tree.k
    r = radii.astype(float)
    correction = np.where(radii > j, np.power(float(k), -(j + 1.0)), 0.0)
    sizes = np.where(radii == 0, 0.0, r + np.log1p(1 / k - correction) / math.log(k))
    return sizes


def _log_level_averages(tree: KaryTree, log_g: np.ndarray, j: int, r_top: int) -> np.ndarray:
    """log_k A_r∘g on level j for r = 0..r_top, with g given on levels 0..len(log_g)-1."""
    k = tree.k
    radii = np.arange(r_top + 1)
    steps = np.arange(j + 1)
    r_col, m_row = radii[:, None], steps[None, :]
    valid = m_row <= r_col
    log_counts = np.where(
        m_row == 0,
        r_col.astype(float),
        np.where(m_row == r_col, 0.0, logk(k - 1, k) + (r_col - m_row - 1).astype(float)),
    )
    targets = np.clip(j + r_col - 2 * m_row, 0, len(log_g) - 1)
    terms = np.where(valid, log_counts + log_g[targets], -np.inf)
    ln_k = math.log(k)
    sums = logsumexp(terms * ln_k, axis=1) / ln_k
    return sums - _log_sphere_sizes(tree, j, radii)


def ms_log_ratio(tree: KaryTree, w: LevelWeight, s: Number, j: int, r: int) -> float:
    """log_k of (A_r∘ w^s)^{1/s}(x) / w(x) for x ∈ T_j."""
    total = logk_sum(
        (
            tree.log_sphere_level_count(j, r, sl.up_steps) + float(s) * w.log_phi(sl.target_depth)
            for sl in tree.sphere_slices(j, r)
        ),
        tree.k,
    )
    return (total - tree.log_sphere_size(j, r)) / float(s) - w.log_phi(j)


def ms_bound(
    tree: KaryTree,
    w: LevelWeight,
    s: Number,
    j_max: int = 200,
    horizon: Optional[int] = None,
) -> ConditionReport:
    """sup over j ≤ j_max of (M∘ w^s)^{1/s}/w on T_j.

    Radii whose spheres stay within `horizon` levels are evaluated exactly; the
    rest are bounded by sup_{i ≥ horizon-2j+1} w^s, which must not exceed the
    exact maximum.

    Raises:
        HorizonError: If the tail bound does not certify some level.
    """
    params = ConditionParams(s=s)
    w = _level_base(w)
    horizon = horizon if horizon is not None else 3 * j_max + 1
    if horizon < 2 * j_max:
        raise HorizonError(f"Horizon {horizon} too short for j_max={j_max}")
    s_value = float(s)
    log_g = np.asarray([s_value * w.log_phi(i) for i in range(horizon + 1)], dtype=float)
    per_level = []
    best, witness = NEG_INF, {}
    for j in range(j_max + 1):
        averages = _log_level_averages(tree, log_g, j, horizon - j)
        r_best = int(np.argmax(averages))
        exact_max = float(averages[r_best])
        tail = s_value * w.log_sup_from(max(0, horizon - 2 * j + 1))
        if tail > exact_max + 1e-12:
            raise HorizonError(
                f"Cannot certify M_s on level {j}: tail bound {tail:.4f} exceeds "
                f"scanned maximum {exact_max:.4f} (log_k) at horizon {horizon}"
            )
        ratio = exact_max / s_value - w.log_phi(j)
        per_level.append(ratio)
        if ratio > best:
            best, witness = ratio, {"j": j, "r": r_best}
    half = max(per_level[: j_max // 2 + 1])
    stabilization = k_pow(max(per_level) - half, tree.k) - 1
    report = build_report(
        LEVEL + "ms",
        tree,
        params,
        {"j_max": j_max, "horizon": horizon, "weight": w.descriptor()},
        per_level,
        witness,
        metadata={"stabilization": stabilization},
    )
    logging.info(
        f"M_s bound (s={s_value}): sup={report.empirical_sup:.6g} "
        f"stabilization={stabilization:.3e} verdict={report.verdict}"
    )
    return report


# Registered checkers


@condition_registry.register(LEVEL + "levelwise")
class LevelwiseCondition(BaseCondition):
    """w(T_i ∩ S(x, r)) ≲ k^{(r+i-j)(p-δ)/2} k^{rδ} w(x) on a (j, r) grid."""

    condition_id = LEVEL + "levelwise"

    def __init__(self, weights, p, delta, j_max=40, r_max=40):
        ConditionParams(p=p, delta=delta)
        self._weights = weights
        self._p, self._delta = p, delta
        self._j_max, self._r_max = j_max, r_max

    def get_condition_args(self) -> Dict[str, Any]:
        return {"p": self._p, "delta": self._delta, "j_max": self._j_max, "r_max": self._r_max}

    def check(self, tree: KaryTree) -> ConditionReport:
        return levelwise_condition_sup(tree, self._weights, self._p, self._delta, self._j_max, self._r_max)

    def evaluate_witness(self, tree: KaryTree, witness: Dict[str, Any]) -> float:
        return levelwise_log_ratio(
            tree, self._weights, self._p, self._delta, witness["j"], witness["r"], witness["m"]
        )


@condition_registry.register(LEVEL + "ap")
class ApCondition(BaseCondition):
    """The A_p product over spheres or balls."""

    condition_id = LEVEL + "ap"

    def __init__(self, weights, p, geometry="sphere", j_max=40, r_max=40):
        ConditionParams(p=p)
        if geometry not in GEOMETRIES:
            raise ValueError(f"Unknown geometry {geometry!r}; expected one of {GEOMETRIES}")
        self._weights = weights
        self._p = p
        self._geometry = geometry
        self._j_max, self._r_max = j_max, r_max

    def get_condition_args(self) -> Dict[str, Any]:
        return {"p": self._p, "geometry": self._geometry, "j_max": self._j_max, "r_max": self._r_max}

    def check(self, tree: KaryTree) -> ConditionReport:
        return ap_constant(tree, self._weights, self._p, self._geometry, self._j_max, self._r_max)

    def evaluate_witness(self, tree: KaryTree, witness: Dict[str, Any]) -> float:
        return log_ap_product(tree, self._weights, self._p, witness["j"], witness["r"], self._geometry)


@condition_registry.register(LEVEL + "ms")
class MsCondition(BaseCondition):
    """M_s w ≲ w for a level weight."""

    condition_id = LEVEL + "ms"

    def __init__(self, weights, s, j_max=200, horizon=None):
        ConditionParams(s=s)
        self._weight = _level_base(as_pair(weights).u)
        self._s = s
        self._j_max, self._horizon = j_max, horizon

    def get_condition_args(self) -> Dict[str, Any]:
        return {"s": self._s, "j_max": self._j_max, "horizon": self._horizon}

    def check(self, tree: KaryTree) -> ConditionReport:
        return ms_bound(tree, self._weight, self._s, self._j_max, self._horizon)

    def evaluate_witness(self, tree: KaryTree, witness: Dict[str, Any]) -> float:
        return ms_log_ratio(tree, self._weight, self._s, witness["j"], witness["r"])
