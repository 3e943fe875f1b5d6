"""Spherical averages, ball averages and the maximal operators M and M∘.

Three evaluation paths are provided and agree exactly on small instances:

* level functions g(depth) are reduced to sums over sphere level slices
  with closed-form counts (`level` path);
* finitely supported functions are evaluated by bucketing the support by
  distance to the center (`sparse` path), with closed-form sphere sizes;
* `oracle_*` functions enumerate spheres breadth-first in the truncated
  tree and use Fraction arithmetic throughout.

Suprema over radii are exact: a sphere S(x, r) misses the support of f as
soon as r - depth(x) exceeds the deepest support level, and for a level
function it also misses it while depth(x) - r does.
"""

import collections
import dataclasses
import math
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import immutabledict
import numpy as np
from absl import logging

from treemax.core.errors import AdmissibilityError, HorizonError
from treemax.core.geometry import KaryTree, Vertex, distance
from treemax.core.weights import AnyWeight, LevelWeight, as_weight
from treemax.utils.numeric import NEG_INF, Number, as_fraction, k_pow, logk, logk_sum

DEFAULT_LEVEL_HORIZON = 500
THRESHOLDS_PER_DECADE = 64

MAXIMAL_KINDS = ("sphere", "ball")


def _is_exact(value) -> bool:
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


def _ratio(numer: Number, denom: int, exact: bool) -> Number:
    if exact:
        return Fraction(numer) / denom
    if isinstance(numer, float):
        return numer * (1 / denom)
    return float(Fraction(numer) / denom)


@dataclasses.dataclass(frozen=True)
class LevelFunction:
    """g(j) on levels 0..len(values)-1, zero beyond."""
    values: Tuple[Number, ...]

    def __post_init__(self):
        values = tuple(self.values)
        for j, v in enumerate(values):
            if v < 0:
                raise ValueError(f"Level function must be nonnegative, got {v} on level {j}")
        object.__setattr__(self, "values", values)

    @classmethod
    def indicator(cls, j: int, value: Number = 1) -> "LevelFunction":
        """value·χ_{T_j}."""
        return cls((0,) * j + (value,))

    @classmethod
    def constant(cls, j_max: int, value: Number = 1) -> "LevelFunction":
        return cls((value,) * (j_max + 1))

    @property
    def j_max(self) -> int:
        """Deepest level carrying a nonzero value, -1 for the zero function."""
        for j in range(len(self.values) - 1, -1, -1):
            if self.values[j] != 0:
                return j
        return -1

    @property
    def exact(self) -> bool:
        return all(_is_exact(v) for v in self.values)

    def __call__(self, j: int) -> Number:
        if 0 <= j < len(self.values):
            return self.values[j]
        return 0

    def at(self, x: Vertex) -> Number:
        return self(x.depth)


@dataclasses.dataclass(frozen=True)
class SparseFunction:
    """A nonnegative function with finite support."""
    support: Mapping[Vertex, Number]

    def __post_init__(self):
        support = immutabledict.immutabledict(
            {x: v for x, v in dict(self.support).items() if v != 0}
        )
        for x, v in support.items():
            if v < 0:
                raise ValueError(f"Sparse function must be nonnegative, got {v} at {x}")
        object.__setattr__(self, "support", support)

    @classmethod
    def from_level(cls, tree: KaryTree, g: LevelFunction) -> "SparseFunction":
        """Materialize a level function on the levels carrying its support."""
        support = {}
        for j in range(g.j_max + 1):
            if g(j):
                for x in tree.level(j):
                    support[x] = g(j)
        return cls(support)

    @classmethod
    def indicator(cls, vertices: Iterable[Vertex], value: Number = 1) -> "SparseFunction":
        return cls({x: value for x in vertices})

    @property
    def j_max(self) -> int:
        return max((x.depth for x in self.support), default=-1)

    @property
    def exact(self) -> bool:
        return all(_is_exact(v) for v in self.support.values())

    def at(self, x: Vertex) -> Number:
        return self.support.get(x, 0)


Function = Union[LevelFunction, SparseFunction]


class MaximalValue(NamedTuple):
    value: Number
    radius: int


@dataclasses.dataclass(frozen=True)
class WeakTypeProfile:
    """Distribution data of a maximal function against a level weight.

    `log_masses[n]` is log_k w({Mf > thresholds[n]}); `log_sup` is log_k of
    sup_λ λ·w({Mf > λ})^{1/p}, computed over the critical thresholds.
    """
    thresholds: Tuple[float, ...]
    log_masses: Tuple[float, ...]
    log_sup: float
    p: float
    maximal: str
    horizon: int
    certified_floor: float
    diverged: bool
    argmax_threshold: float

    @property
    def log_weak_pth_power(self) -> float:
        """log_k sup_λ λ^p w({Mf > λ})."""
        return self.p * self.log_sup


@dataclasses.dataclass(frozen=True)
class SeriesSum:
    """Partial sums of Σ_r ‖A_r∘ f‖_{L^p(w)}, all in log_k."""
    log_terms: Tuple[float, ...]
    log_partial_sums: Tuple[float, ...]
    tail_increment: float
    converged: bool


# Sphere and ball averages


def _level_pair_sum(tree: KaryTree, g: LevelFunction, j: int, r: int) -> Number:
    """Σ_{y ∈ S(x,r)} g(depth y) for x of depth j."""
    top = g.j_max
    if top < 0:
        return 0
    total: Number = 0
    lowest_m = max(0, -((top - j - r) // 2))
    for m in range(lowest_m, min(r, j) + 1):
        value = g(j + r - 2 * m)
        if value:
            total += tree.sphere_level_count(j, r, m) * value
    return total


def _distance_buckets(f: SparseFunction, x: Vertex) -> Dict[int, Number]:
    buckets: Dict[int, Number] = collections.defaultdict(int)
    for y, value in f.support.items():
        buckets[distance(x, y)] += value
    return buckets


def pair_sum(tree: KaryTree, f: Function, x: Vertex, r: int) -> Number:
    """P_r f(x) = Σ_{d(x,y)=r} f(y), the unnormalized sphere sum."""
    if isinstance(f, LevelFunction):
        return _level_pair_sum(tree, f, x.depth, r)
    return sum((v for y, v in f.support.items() if distance(x, y) == r), 0)


def sphere_average(tree: KaryTree, f: Function, x: Vertex, r: int, exact: bool = False) -> Number:
    """A_r∘ f(x), the mean of f over S(x, r)."""
    return _ratio(pair_sum(tree, f, x, r), tree.sphere_size(x.depth, r), exact)


def level_sphere_average(tree: KaryTree, g: LevelFunction, j: int, r: int, exact: bool = False) -> Number:
    """A_r∘ g on level j."""
    return _ratio(_level_pair_sum(tree, g, j, r), tree.sphere_size(j, r), exact)


def ball_average(tree: KaryTree, f: Function, x: Vertex, r: int, exact: bool = False) -> Number:
    """The mean of f over B(x, r), a convex combination of sphere averages."""
    if isinstance(f, LevelFunction):
        total = sum((_level_pair_sum(tree, f, x.depth, s) for s in range(r + 1)), 0)
    else:
        total = sum((v for y, v in f.support.items() if distance(x, y) <= r), 0)
    return _ratio(total, tree.ball_size(x.depth, r), exact)


def _radius_range(f: Function, depth: int) -> range:
    top = f.j_max
    if top < 0:
        return range(0, 1)
    low = max(0, depth - top) if isinstance(f, LevelFunction) else 0
    return range(low, depth + top + 1)


def _argmax(candidates: Iterable[Tuple[int, Number]]) -> MaximalValue:
    best = MaximalValue(0, 0)
    found = False
    for radius, value in candidates:
        if not found or value > best.value:
            best = MaximalValue(value, radius)
            found = True
    return best


def _sphere_candidates(tree: KaryTree, f: Function, x: Vertex, exact: bool):
    j = x.depth
    if isinstance(f, LevelFunction):
        for r in _radius_range(f, j):
            yield r, level_sphere_average(tree, f, j, r, exact)
    else:
        buckets = _distance_buckets(f, x)
        for r in _radius_range(f, j):
            yield r, _ratio(buckets.get(r, 0), tree.sphere_size(j, r), exact)


def _ball_candidates(tree: KaryTree, f: Function, x: Vertex, exact: bool):
    j = x.depth
    if isinstance(f, LevelFunction):
        sums = {r: _level_pair_sum(tree, f, j, r) for r in _radius_range(f, j)}
    else:
        sums = _distance_buckets(f, x)
    running: Number = 0
    for r in range(0, x.depth + max(f.j_max, 0) + 1):
        running += sums.get(r, 0)
        yield r, _ratio(running, tree.ball_size(j, r), exact)


def maximal_sphere(tree: KaryTree, f: Function, x: Vertex, exact: bool = False) -> MaximalValue:
    """M∘f(x) and the smallest radius attaining it."""
    return _argmax(_sphere_candidates(tree, f, x, exact))


def maximal_ball(tree: KaryTree, f: Function, x: Vertex, exact: bool = False) -> MaximalValue:
    """Mf(x) and the smallest radius attaining it."""
    return _argmax(_ball_candidates(tree, f, x, exact))


def maximal(tree: KaryTree, f: Function, x: Vertex, kind: str = "sphere", exact: bool = False) -> MaximalValue:
    if kind == "sphere":
        return maximal_sphere(tree, f, x, exact)
    if kind == "ball":
        return maximal_ball(tree, f, x, exact)
    raise ValueError(f"Unknown maximal operator {kind!r}; expected one of {MAXIMAL_KINDS}")


def _level_profile(tree: KaryTree, g: LevelFunction, j_max: int, kind: str, exact: bool) -> LevelFunction:
    representative = Vertex((0,) * j_max)
    values = []
    for j in range(j_max + 1):
        values.append(maximal(tree, g, Vertex(representative.path[:j]), kind, exact).value)
    return LevelFunction(tuple(values))


def maximal_level_profile(tree: KaryTree, g: LevelFunction, j_max: int, exact: bool = False) -> LevelFunction:
    """j ↦ M∘g on T_j for j ≤ j_max."""
    return _level_profile(tree, g, j_max, "sphere", exact)


def maximal_ball_level_profile(tree: KaryTree, g: LevelFunction, j_max: int, exact: bool = False) -> LevelFunction:
    """j ↦ Mg on T_j for j ≤ j_max."""
    return _level_profile(tree, g, j_max, "ball", exact)


def superlevel_bound(tree: KaryTree, g: LevelFunction, level: int) -> float:
    """Upper bound for M∘g (and Mg) on every level ≥ `level` > deepest support level.

    A vertex at depth i sees a support level l only at radius r ≥ i - l, where
    count/|S| ≤ k^{(r+l-i)/2 - r} ≤ k^{l-i}.
    """
    if level <= g.j_max:
        raise ValueError(f"Bound only holds beyond the support (level {level} <= {g.j_max})")
    return math.fsum(float(g(l)) * k_pow(l - level, tree.k) for l in range(g.j_max + 1))


# Functionals


def _log_value(value: Number, k: int) -> float:
    return logk(value, k) if value else NEG_INF


def log_level_terms(tree: KaryTree, h: LevelFunction, w: LevelWeight, q: float, levels: Iterable[int]) -> List[float]:
    """log_k ∫_{T_i} h^q w = i + log_k φ(i) + q·log_k h(i), per level."""
    terms = []
    for i in levels:
        value = h(i)
        terms.append(i + w.log_phi(i) + q * _log_value(value, tree.k) if value else NEG_INF)
    return terms


def log_lp_mass(tree: KaryTree, f: Function, w: AnyWeight, p: float) -> float:
    """log_k ‖f‖_{L^p(w)}^p."""
    if p <= 0:
        raise AdmissibilityError("p > 0", f"p={p}")
    if isinstance(f, LevelFunction):
        w = w.base if not isinstance(w, LevelWeight) and w.is_level else w
        if not isinstance(w, LevelWeight):
            raise TypeError("Level functions need a level weight")
        return logk_sum(log_level_terms(tree, f, w, p, range(f.j_max + 1)), tree.k)
    weight = as_weight(w)
    return logk_sum(
        (weight.log_value(x, tree.k) + p * _log_value(v, tree.k) for x, v in f.support.items()),
        tree.k,
    )


def lp_norm(tree: KaryTree, f: Function, w: AnyWeight, p: float) -> float:
    """log_k ‖f‖_{L^p(w)}."""
    mass = log_lp_mass(tree, f, w, p)
    return mass / p if mass != NEG_INF else NEG_INF


def _threshold_grid(low: float, high: float) -> np.ndarray:
    if low <= 0 or high <= 0:
        return np.asarray([], dtype=float)
    if high <= low:
        return np.asarray([low], dtype=float)
    decades = math.log10(high) - math.log10(low)
    count = max(2, int(math.ceil(decades * THRESHOLDS_PER_DECADE)) + 1)
    grid = np.logspace(math.log10(low), math.log10(high), count)
    grid[0], grid[-1] = low, high
    return grid


def weak_profile(
    tree: KaryTree,
    g: LevelFunction,
    w: LevelWeight,
    p: float,
    thresholds: Optional[Sequence[float]] = None,
    horizon: int = DEFAULT_LEVEL_HORIZON,
    kind: str = "ball",
) -> WeakTypeProfile:
    """Weak-type data of Mg (kind="ball") or M∘g (kind="sphere") in L^p(w).

    Levels beyond `horizon` are excluded by the certified bound
    `superlevel_bound(g, horizon + 1)`; thresholds below it are reported as
    diverged rather than silently truncated.
    """
    if p <= 0:
        raise AdmissibilityError("p > 0", f"p={p}")
    if horizon <= g.j_max:
        raise HorizonError(f"Horizon {horizon} does not reach past the support level {g.j_max}")
    profile = _level_profile(tree, g, horizon, kind, exact=False)
    floor = superlevel_bound(tree, g, horizon + 1)
    values = np.asarray([float(profile(i)) for i in range(horizon + 1)], dtype=float)
    log_masses_per_level = np.asarray(
        [i + w.log_phi(i) for i in range(horizon + 1)], dtype=float
    )

    order = np.argsort(-values, kind="stable")
    sorted_values = values[order]
    ln_k = math.log(tree.k)
    cumulative = np.logaddexp.accumulate(log_masses_per_level[order] * ln_k) / ln_k

    def log_mass_above(lam: float) -> float:
        count = int(np.searchsorted(-sorted_values, -lam, side="left"))
        return float(cumulative[count - 1]) if count else NEG_INF

    positive = sorted_values[sorted_values > 0]
    if thresholds is None:
        low = max(float(positive.min()) if positive.size else 0.0, floor)
        high = float(positive.max()) if positive.size else 0.0
        thresholds = _threshold_grid(low, high)
    thresholds = tuple(float(t) for t in thresholds)
    diverged = any(t < floor for t in thresholds)
    if diverged:
        logging.warning(
            f"Thresholds below the certified floor {floor:.3e} at horizon {horizon}; "
            "their masses are not certified"
        )
    log_masses = tuple(log_mass_above(t) for t in thresholds)

    # sup over λ is approached from below each critical value v: {Mg > λ} -> {Mg >= v}.
    log_sup = NEG_INF
    argmax_threshold = 0.0
    for index, v in enumerate(sorted_values):
        if v <= floor or v <= 0:
            break
        if index + 1 < len(sorted_values) and sorted_values[index + 1] == v:
            continue
        candidate = logk(float(v), tree.k) + float(cumulative[index]) / p
        if candidate > log_sup:
            log_sup, argmax_threshold = candidate, float(v)

    logging.debug(f"Weak profile: horizon={horizon} floor={floor:.3e} log_sup={log_sup:.6f}")
    return WeakTypeProfile(
        thresholds=thresholds,
        log_masses=log_masses,
        log_sup=log_sup,
        p=float(p),
        maximal=kind,
        horizon=horizon,
        certified_floor=floor,
        diverged=diverged,
        argmax_threshold=argmax_threshold,
    )


def sphere_average_levels(tree: KaryTree, g: LevelFunction, r: int) -> LevelFunction:
    """A_r∘ g as a level function; finitely supported on levels ≤ j_max + r."""
    top = g.j_max
    if top < 0:
        return LevelFunction(())
    return LevelFunction(
        tuple(level_sphere_average(tree, g, j, r) for j in range(top + r + 1))
    )


def series_norm_sum(
    tree: KaryTree,
    g: LevelFunction,
    w: LevelWeight,
    p: float,
    radius: int,
    tail_ratio: float = 0.01,
    level_horizon: int = DEFAULT_LEVEL_HORIZON,
) -> SeriesSum:
    """Partial sums of Σ_{r=0}^{R} ‖A_r∘ g‖_{L^p(w)}.

    Converged when the increment over the last ten radii is below
    `tail_ratio` of the total.
    """
    if g.j_max + radius > level_horizon:
        raise HorizonError(
            f"Levels up to {g.j_max + radius} exceed the level horizon {level_horizon}"
        )
    log_terms = []
    for r in range(radius + 1):
        averaged = sphere_average_levels(tree, g, r)
        mass = logk_sum(log_level_terms(tree, averaged, w, p, range(len(averaged.values))), tree.k)
        log_terms.append(mass / p if mass != NEG_INF else NEG_INF)
    partial = []
    running = NEG_INF
    for term in log_terms:
        running = logk_sum((running, term), tree.k)
        partial.append(running)
    if partial[-1] == NEG_INF:
        return SeriesSum(tuple(log_terms), tuple(partial), 0.0, True)
    window = min(10, radius)
    before = partial[-1 - window] if window else NEG_INF
    total = k_pow(partial[-1], tree.k)
    increment = total - (k_pow(before, tree.k) if before != NEG_INF else 0.0)
    relative = increment / total if window else 0.0
    converged = window > 0 and relative < tail_ratio
    return SeriesSum(tuple(log_terms), tuple(partial), relative, converged)


def strong_type_ratio(
    tree: KaryTree,
    g: LevelFunction,
    w: LevelWeight,
    q: float,
    horizon: int = DEFAULT_LEVEL_HORIZON,
    kind: str = "sphere",
) -> float:
    """log_k of Σ_{i ≤ horizon} ∫_{T_i}(Mg)^q w divided by ‖g‖^q_{L^q(w)}."""
    profile = _level_profile(tree, g, horizon, kind, exact=False)
    numer = logk_sum(log_level_terms(tree, profile, w, q, range(horizon + 1)), tree.k)
    return numer - log_lp_mass(tree, g, w, q)


# Brute-force oracles


def _oracle_depth(f: Function, x: Vertex, r: int) -> int:
    return x.depth + r


def oracle_sphere_average(tree: KaryTree, f: Function, x: Vertex, r: int) -> Fraction:
    """A_r∘ f(x) by enumerating S(x, r); exact."""
    sphere = tree.enumerate_sphere(x, r, _oracle_depth(f, x, r))
    values = (as_fraction(_value_at(f, y)) for y in sphere)
    return sum(values, Fraction(0)) / len(sphere)


def oracle_ball_average(tree: KaryTree, f: Function, x: Vertex, r: int) -> Fraction:
    ball = tree.enumerate_ball(x, r, _oracle_depth(f, x, r))
    return sum((as_fraction(_value_at(f, y)) for y in ball), Fraction(0)) / len(ball)


def oracle_maximal(tree: KaryTree, f: Function, x: Vertex, kind: str = "sphere") -> MaximalValue:
    average = oracle_sphere_average if kind == "sphere" else oracle_ball_average
    radii = range(0, x.depth + max(f.j_max, 0) + 1)
    return _argmax((r, average(tree, f, x, r)) for r in radii)


def _value_at(f: Function, y: Vertex) -> Number:
    return f.at(y)
