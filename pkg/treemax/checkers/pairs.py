"""Pair measures and the quantities built on them.

The pair measure of (E, F) at radius r is Σ_{x∈E} u(F ∩ S(x, r)). Finite sets
are handled by brute force; unions of level slices T_j ∩ subtree(a) use closed
counts of vertex pairs by common-prefix length.
"""

import dataclasses
import math
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from absl import logging
from scipy import optimize

from treemax.core.conditions import ConditionParams
from treemax.core.errors import AdmissibilityError
from treemax.core.geometry import KaryTree, Vertex, distance
from treemax.core.operators import SparseFunction, lp_norm, sphere_average
from treemax.core.weights import AnyWeight, WeightPair, as_pair, as_weight, set_weight
from treemax.utils.numeric import NEG_INF, Number, as_fraction, k_pow, logk, logk_sum


@dataclasses.dataclass(frozen=True, order=True)
class LevelSlice:
    """T_depth ∩ subtree(root)."""
    root: Vertex
    depth: int

    def __post_init__(self):
        if self.depth < self.root.depth:
            raise ValueError(f"Slice depth {self.depth} above its root at depth {self.root.depth}")

    def size(self, k: int) -> int:
        return k ** (self.depth - self.root.depth)

    def log_size(self, k: int) -> int:
        return self.depth - self.root.depth

    def vertices(self, tree: KaryTree) -> FrozenSet[Vertex]:
        return frozenset(tree.descendants(self.root, self.depth))

    def contains(self, x: Vertex) -> bool:
        return x.depth == self.depth and self.root.is_ancestor_of(x)

    def overlaps(self, other: "LevelSlice") -> bool:
        return self.depth == other.depth and (
            self.root.is_ancestor_of(other.root) or other.root.is_ancestor_of(self.root)
        )

    def to_dict(self) -> Dict:
        return {"root": list(self.root.path), "depth": self.depth}

    @classmethod
    def from_dict(cls, data: Dict) -> "LevelSlice":
        return cls(Vertex(tuple(data["root"])), int(data["depth"]))


VertexSet = Union[FrozenSet[Vertex], LevelSlice, Sequence[LevelSlice]]


def _as_slices(vertices: VertexSet) -> Optional[Tuple[LevelSlice, ...]]:
    if isinstance(vertices, LevelSlice):
        return (vertices,)
    if isinstance(vertices, (list, tuple)) and all(isinstance(v, LevelSlice) for v in vertices):
        slices = tuple(vertices)
        for a in range(len(slices)):
            for b in range(a + 1, len(slices)):
                if slices[a].overlaps(slices[b]):
                    raise ValueError(f"Overlapping slices {slices[a]} and {slices[b]}")
        return slices
    return None


def as_vertex_set(tree: KaryTree, vertices: VertexSet) -> FrozenSet[Vertex]:
    slices = _as_slices(vertices)
    if slices is None:
        return frozenset(vertices)
    result = set()
    for s in slices:
        result |= s.vertices(tree)
    return frozenset(result)


def _lcp_histogram(k: int, a: Sequence[int], j: int, b: Sequence[int], i: int) -> Dict[int, int]:
    """Pairs (x, y), x extending a to depth j and y extending b to depth i, by common-prefix length."""
    agree = k ** (j - len(a)) * k ** (i - len(b))
    histogram: Dict[int, int] = {}
    for t in range(min(j, i)):
        fixed_x = t < len(a)
        fixed_y = t < len(b)
        if fixed_x and fixed_y:
            following = agree if a[t] == b[t] else 0
        else:
            following = agree // k
        if agree - following:
            histogram[t] = agree - following
        agree = following
        if not agree:
            break
    if agree:
        histogram[min(j, i)] = histogram.get(min(j, i), 0) + agree
    return histogram


def slice_pair_distances(tree: KaryTree, e: LevelSlice, f: LevelSlice) -> Dict[int, int]:
    """Number of pairs (x, y) ∈ e × f at each distance."""
    histogram = _lcp_histogram(tree.k, e.root.path, e.depth, f.root.path, f.depth)
    return {e.depth + f.depth - 2 * t: count for t, count in histogram.items()}


def pair_measure(
    tree: KaryTree,
    weights: Union[AnyWeight, WeightPair],
    E: VertexSet,
    F: VertexSet,
    r: int,
    exact: bool = False,
) -> Number:
    """𝟙⊗u({(x, y) ∈ E × F : d(x, y) = r}) = Σ_{x∈E} u(F ∩ S(x, r)).

    Unions of level slices with a level weight take the closed-form path.
    """
    u = as_weight(as_pair(weights).u)
    e_slices, f_slices = _as_slices(E), _as_slices(F)
    if e_slices is not None and f_slices is not None and u.is_level:
        total: Number = Fraction(0) if exact else 0.0
        for e in e_slices:
            for f in f_slices:
                count = slice_pair_distances(tree, e, f).get(r, 0)
                if not count:
                    continue
                if exact:
                    total += count * u.base.exact_value(f.depth, tree.k)
                else:
                    total += count * u.base.value(f.depth, tree.k)
        return total
    E, F = as_vertex_set(tree, E), as_vertex_set(tree, F)
    value = u.exact_value if exact else u.value
    terms = [value(y, tree.k) for x in E for y in F if distance(x, y) == r]
    if exact:
        return sum(terms, Fraction(0))
    return math.fsum(terms)


def log_pair_measure(tree: KaryTree, weights: Union[AnyWeight, WeightPair], E: VertexSet, F: VertexSet, r: int) -> float:
    """log_k of the pair measure, overflow-free on the slice path."""
    u = as_weight(as_pair(weights).u)
    e_slices, f_slices = _as_slices(E), _as_slices(F)
    if e_slices is not None and f_slices is not None and u.is_level:
        terms = []
        for e in e_slices:
            for f in f_slices:
                count = slice_pair_distances(tree, e, f).get(r, 0)
                if count:
                    terms.append(logk(count, tree.k) + u.base.log_phi(f.depth))
        return logk_sum(terms, tree.k)
    return logk(pair_measure(tree, weights, E, F, r), tree.k)


def log_set_measure(tree: KaryTree, weight: AnyWeight, vertices: VertexSet) -> float:
    """log_k w(S) for a finite set or a union of level slices."""
    w = as_weight(weight)
    slices = _as_slices(vertices)
    if slices is not None and w.is_level:
        return logk_sum(
            (s.log_size(tree.k) + w.base.log_phi(s.depth) for s in slices), tree.k
        )
    return logk(set_weight(tree, w, as_vertex_set(tree, vertices)), tree.k)


def _is_empty(vertices: VertexSet) -> bool:
    slices = _as_slices(vertices)
    return not slices if slices is not None else not vertices


def suffcond_ratio(
    tree: KaryTree,
    weights: Union[AnyWeight, WeightPair],
    params: ConditionParams,
    E: VertexSet,
    F: VertexSet,
    r: int,
) -> float:
    """log_k of pair_measure / (k^{rβ} v(E)^{α/p} u(F)^{1-α/p}).

    Raises:
        ValueError: If E or F is empty.
    """
    params.require("p", "beta", "alpha")
    if _is_empty(E) or _is_empty(F):
        raise ValueError("E and F must be nonempty")
    pair = as_pair(weights)
    theta = params.alpha / params.p
    log_pair = log_pair_measure(tree, pair, E, F, r)
    if log_pair == NEG_INF:
        return NEG_INF
    return (
        log_pair
        - r * float(params.beta)
        - float(theta) * log_set_measure(tree, pair.v, E)
        - float(1 - theta) * log_set_measure(tree, pair.u, F)
    )


# Pairing bound between level pieces


def _up_steps(j: int, i: int, r: int) -> int:
    twice = j + r - i
    if twice < 0 or twice % 2 or twice // 2 > min(r, j):
        raise ValueError(f"No sphere of radius {r} links level {j} to level {i}")
    return twice // 2


def log_corsuff_pairing_bound(
    tree: KaryTree, j: int, i: int, r: int, log_wE: float, log_wF: float, p: Number, delta: Number
) -> float:
    """log_k min{k^{(r-m)(p-δ)} k^{rδ} w(E_j), k^m w(F_i)} with i = j + r - 2m."""
    ConditionParams(p=p, delta=delta)
    m = _up_steps(j, i, r)
    return min(
        (r - m) * float(p - delta) + r * float(delta) + log_wE,
        m + log_wF,
    )


def corsuff_pairing_bound(
    tree: KaryTree, j: int, i: int, r: int, wE: float, wF: float, p: Number, delta: Number
) -> float:
    """The min-bound for the pair measure between E_j ⊂ T_j and F_i ⊂ T_i."""
    if wE < 0 or wF < 0:
        raise ValueError("Weights of E and F must be nonnegative")
    bound = log_corsuff_pairing_bound(
        tree, j, i, r, logk(wE, tree.k), logk(wF, tree.k), p, delta
    )
    return k_pow(bound, tree.k) if bound != NEG_INF else 0.0


class PairingConstant(NamedTuple):
    constant: float
    witness: Optional[Tuple[int, int]]


def pairing_constant(
    tree: KaryTree,
    weights: Union[AnyWeight, WeightPair],
    E: Iterable[Vertex],
    F: Iterable[Vertex],
    r: int,
    p: Number,
    delta: Number,
) -> PairingConstant:
    """Largest ratio of the exact pair measure between level pieces E_j, F_i to the min-bound."""
    pair = as_pair(weights)
    by_level_e: Dict[int, List[Vertex]] = {}
    by_level_f: Dict[int, List[Vertex]] = {}
    for x in E:
        by_level_e.setdefault(x.depth, []).append(x)
    for y in F:
        by_level_f.setdefault(y.depth, []).append(y)
    best, witness = 0.0, None
    for j, e_piece in sorted(by_level_e.items()):
        log_we = logk(set_weight(tree, pair.v, e_piece), tree.k)
        for i, f_piece in sorted(by_level_f.items()):
            try:
                bound = log_corsuff_pairing_bound(
                    tree, j, i, r, log_we, logk(set_weight(tree, pair.u, f_piece), tree.k), p, delta
                )
            except ValueError as e:
                if isinstance(e, AdmissibilityError):
                    raise
                continue
            value = pair_measure(tree, pair, frozenset(e_piece), frozenset(f_piece), r)
            if not value:
                continue
            ratio = k_pow(logk(value, tree.k) - bound, tree.k)
            if ratio > best:
                best, witness = ratio, (j, i)
    return PairingConstant(best, witness)


# ρ-minimization of the pairing bound


@dataclasses.dataclass(frozen=True)
class RhoOptimum:
    """Minimizer of f(ρ) = k^{(p+δ)r/2} k^{ρ(p-δ)/2} wE + k^{r/2} k^{-ρ/2} wF."""
    rho: float
    log_value: float
    constant: float
    log_bound: float
    k: int

    @property
    def value(self) -> float:
        return k_pow(self.log_value, self.k)

    @property
    def bound(self) -> float:
        return k_pow(self.log_bound, self.k)


def log_rho_objective(p: float, delta: float, r: float, wE: float, wF: float, rho, k: int = 2):
    """log_k f(ρ); vectorized over numpy arrays of ρ."""
    ln_k = math.log(k)
    first = ((p + delta) / 2 * r + np.asarray(rho) * (p - delta) / 2 + logk(wE, k)) * ln_k
    second = (r / 2 - np.asarray(rho) / 2 + logk(wF, k)) * ln_k
    return np.logaddexp(first, second) / ln_k


def rho_optimize(p: Number, delta: Number, r: float, wE: float, wF: float, k: int = 2) -> RhoOptimum:
    """Closed-form minimizer ρ* and the value c_{p,δ} k^{pr/(p-δ+1)} wF^{1-1/(p-δ+1)} wE^{1/(p-δ+1)}.

    Raises:
        AdmissibilityError: If p <= 1, δ >= 1 or a weight is not positive.
    """
    ConditionParams(p=p, delta=delta)
    if not (wE > 0 and wF > 0):
        raise AdmissibilityError("wE > 0 and wF > 0", f"wE={wE}, wF={wF}")
    p, delta = float(p), float(delta)
    gap = p - delta
    denom = gap + 1
    rho = 2 * logk(wF / (wE * gap), k) / denom - (p + delta - 1) * r / denom
    constant = gap ** (-gap / denom) + gap ** (1 / denom)
    log_bound = logk(constant, k) + p * r / denom + (gap / denom) * logk(wF, k) + logk(wE, k) / denom
    log_value = float(log_rho_objective(p, delta, r, wE, wF, rho, k))
    return RhoOptimum(rho=rho, log_value=log_value, constant=constant, log_bound=log_bound, k=k)


class RhoGridCheck(NamedTuple):
    min_relative_gap: float
    convex: bool
    scipy_rho: float


def rho_grid_check(
    p: Number, delta: Number, r: float, wE: float, wF: float, k: int = 2, span: float = 5.0, step: float = 1e-3
) -> RhoGridCheck:
    """Compare ρ* against a grid over [ρ*-span, ρ*+span] and a bounded scalar minimizer.

    `min_relative_gap` is min over the grid of f(ρ)/f(ρ*) - 1; `convex` holds
    when every second difference of f along the grid is positive.
    """
    optimum = rho_optimize(p, delta, r, wE, wF, k)
    count = int(round(2 * span / step)) + 1
    grid = np.linspace(optimum.rho - span, optimum.rho + span, count)
    relative = np.power(float(k), log_rho_objective(float(p), float(delta), r, wE, wF, grid, k) - optimum.log_value)
    convex = bool(np.all(np.diff(relative, 2) > 0))
    result = optimize.minimize_scalar(
        lambda x: float(log_rho_objective(float(p), float(delta), r, wE, wF, x, k)),
        bounds=(optimum.rho - span, optimum.rho + span),
        method="bounded",
        options={"xatol": 1e-10},
    )
    return RhoGridCheck(float(relative.min() - 1), convex, float(result.x))


# Necessity chain


class NecessityChain(NamedTuple):
    log_pair: float
    log_middle: float
    log_strong_bound: Optional[float]
    holds: bool


def necessity_chain(
    tree: KaryTree,
    weight: AnyWeight,
    p: Number,
    E: VertexSet,
    F: VertexSet,
    r: int,
    strong_constant: Optional[float] = None,
    tolerance: float = 1e-9,
) -> NecessityChain:
    """Check pair ≤ 2k^r w(F)^{1-1/p} ‖A_r∘χ_E‖_{L^p(w)} ≤ 2k^r w(F)^{1-1/p} S w(E)^{1/p}.

    The second inequality is only checked when a strong-type constant S is supplied.
    """
    ConditionParams(p=p)
    E, F = as_vertex_set(tree, E), as_vertex_set(tree, F)
    if not E or not F:
        raise ValueError("E and F must be nonempty")
    p = float(p)
    indicator = SparseFunction.indicator(E)
    depth_limit = max(x.depth for x in E) + r
    support = set()
    for x in E:
        support |= tree.enumerate_sphere(x, r, depth_limit)
    averaged = SparseFunction({y: sphere_average(tree, indicator, y, r, exact=True) for y in support})
    log_norm = lp_norm(tree, averaged, weight, p)
    log_wf = log_set_measure(tree, weight, F)
    log_pair = log_pair_measure(tree, weight, E, F, r)
    log_middle = logk(2, tree.k) + r + (1 - 1 / p) * log_wf + log_norm
    holds = log_pair <= log_middle + tolerance
    log_strong = None
    if strong_constant is not None:
        log_strong = (
            logk(2, tree.k) + r + (1 - 1 / p) * log_wf
            + logk(strong_constant, tree.k) + log_set_measure(tree, weight, E) / p
        )
        holds = holds and log_middle <= log_strong + tolerance
    return NecessityChain(log_pair, log_middle, log_strong, holds)


# Distributional inequality for single sphere averages


@dataclasses.dataclass(frozen=True)
class SumLevelsInstance:
    f: SparseFunction
    r: int
    lam: Fraction


def _sphere_union(tree: KaryTree, f: SparseFunction, r: int) -> FrozenSet[Vertex]:
    union = set()
    for y in f.support:
        union |= tree.enumerate_sphere(y, r, y.depth + r)
    return frozenset(union)


def sum_levels_sides(
    tree: KaryTree, weight: AnyWeight, params: ConditionParams, instance: SumLevelsInstance
) -> Tuple[float, float]:
    """Both sides of w({A_r∘f ≥ λ}) ≲ Σ_n (2^n/k^r)^{(1-β)p/(2α)} 2^{βpn/α} w({f ≥ 2^{n-1}λ}).

    The sum runs over n ≥ 0 with 2^n ≤ 2k^r.
    """
    params.require("p", "beta", "alpha")
    f, r, lam = instance.f, instance.r, as_fraction(instance.lam)
    if lam <= 0:
        raise ValueError(f"Threshold must be positive, got {lam}")
    above = [
        x for x in _sphere_union(tree, f, r)
        if sphere_average(tree, f, x, r, exact=True) >= lam
    ]
    lhs = set_weight(tree, weight, above)
    p, beta, alpha = float(params.p), float(params.beta), float(params.alpha)
    theta = (1 - beta) / 2 * p / alpha
    power = beta * p / alpha
    rhs = 0.0
    n = 0
    while 2 ** n <= 2 * tree.k ** r:
        level = Fraction(2 ** n, 2) * lam
        heavy = [y for y, v in f.support.items() if as_fraction(v) >= level]
        if heavy:
            rhs += (2 ** n / tree.k ** r) ** theta * 2 ** (power * n) * set_weight(tree, weight, heavy)
        n += 1
    return lhs, rhs


def sum_levels_ratio(tree: KaryTree, weight: AnyWeight, params: ConditionParams, instance: SumLevelsInstance) -> float:
    lhs, rhs = sum_levels_sides(tree, weight, params, instance)
    return lhs / rhs if rhs else (0.0 if not lhs else math.inf)


SUM_LEVELS_VALUES = (1, 2, 4)


def random_sum_levels_instance(tree: KaryTree, seed: int, max_depth: int = 8) -> SumLevelsInstance:
    """A seeded instance with r = 1 + seed % 3 and at most three point masses.

    Support depths lie in [2r, max_depth], so every sphere meeting the
    support has the same cardinality.
    """
    rng = np.random.default_rng(seed)
    r = 1 + seed % 3
    if max_depth < 2 * r:
        raise ValueError(f"max_depth {max_depth} too shallow for radius {r}")
    support: Dict[Vertex, int] = {}
    for _ in range(int(rng.integers(1, 4))):
        depth = int(rng.integers(2 * r, max_depth + 1))
        path = tuple(int(d) for d in rng.integers(0, tree.k, size=depth))
        support[Vertex(path)] = int(rng.choice(SUM_LEVELS_VALUES))
    f = SparseFunction(support)
    attained = sorted({sphere_average(tree, f, x, r, exact=True) for x in _sphere_union(tree, f, r)})
    attained = [v for v in attained if v > 0]
    if rng.random() < 0.5:
        lam = attained[0]
    else:
        lam = attained[int(rng.integers(len(attained)))]
    return SumLevelsInstance(f, r, lam)


def sum_levels_corpus(tree: KaryTree, seeds: Iterable[int], max_depth: int = 8) -> List[SumLevelsInstance]:
    return [random_sum_levels_instance(tree, seed, max_depth) for seed in seeds]


def calibrate_sum_levels(
    tree: KaryTree, weight: AnyWeight, params: ConditionParams, corpus: Sequence[SumLevelsInstance]
) -> float:
    """C₀ = the largest left/right ratio over a calibration corpus."""
    constant = max(sum_levels_ratio(tree, weight, params, inst) for inst in corpus)
    logging.info(f"Calibrated distributional constant C0={constant:.6f} on {len(corpus)} instances")
    return constant


def sum_levels_violations(
    tree: KaryTree,
    weight: AnyWeight,
    params: ConditionParams,
    corpus: Sequence[SumLevelsInstance],
    constant: float,
) -> List[int]:
    """Indices of corpus instances where the left side exceeds constant × right side."""
    violations = []
    for index, inst in enumerate(corpus):
        lhs, rhs = sum_levels_sides(tree, weight, params, inst)
        if lhs > constant * rhs:
            violations.append(index)
    if violations:
        logging.warning(f"{len(violations)} distributional violations at C={constant:.6f}")
    return violations
