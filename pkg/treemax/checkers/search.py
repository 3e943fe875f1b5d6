"""Extremal-set search for the pair condition.

Candidate (E, F, r) triples come from four families, scanned in order:

* ``slices``: E and F single level slices T_j ∩ subtree(a);
* ``sphere``: E = {x}, F = S(x, r) inside the truncation;
* ``random``: seeded random vertex sets;
* ``greedy``: vertex additions to the best finite witness, by marginal gain.

For level weights the slice family is reduced by symmetry: E roots run over
the leftmost path and F roots over one representative per (depth, common
prefix with the E root).
"""

import dataclasses
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

import numpy as np
from absl import logging

from treemax.checkers.pairs import LevelSlice, suffcond_ratio
from treemax.checkers.registry import PAIR, condition_registry
from treemax.core.conditions import BaseCondition, ConditionParams, ConditionReport, build_report
from treemax.core.geometry import KaryTree, Vertex, distance
from treemax.core.weights import AnyWeight, WeightPair, as_pair, as_weight
from treemax.utils.numeric import NEG_INF, logk

FAMILIES = ("slices", "sphere", "random", "greedy")

DEFAULT_BUDGET = 250_000
MAX_RANDOM_SET_SIZE = 8


class _Budget:
    """Counts candidate evaluations."""

    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    @property
    def exhausted(self) -> bool:
        return self.used >= self.limit

    def spend(self, n: int = 1) -> bool:
        if self.used + n > self.limit:
            self.used = self.limit
            return False
        self.used += n
        return True


@dataclasses.dataclass
class _Best:
    per_radius: List[float]
    value: float = NEG_INF
    witness: Dict[str, Any] = dataclasses.field(default_factory=dict)
    sets_value: float = NEG_INF
    sets_witness: Optional[Tuple[FrozenSet[Vertex], FrozenSet[Vertex], int]] = None

    def offer(self, value: float, r: int, witness: Dict[str, Any]) -> None:
        if value > self.per_radius[r]:
            self.per_radius[r] = value
        if value > self.value:
            self.value, self.witness = value, witness

    def offer_sets(self, value: float, E: FrozenSet[Vertex], F: FrozenSet[Vertex], r: int, kind: str) -> None:
        self.offer(value, r, _sets_witness(kind, E, F, r))
        if value > self.sets_value:
            self.sets_value, self.sets_witness = value, (E, F, r)


def _sets_witness(kind: str, E, F, r: int) -> Dict[str, Any]:
    return {
        "kind": kind,
        "E": sorted(list(x.path) for x in E),
        "F": sorted(list(y.path) for y in F),
        "r": r,
    }


def _slices_witness(e: LevelSlice, f: LevelSlice, r: int) -> Dict[str, Any]:
    return {"kind": "slices", "E": [e.to_dict()], "F": [f.to_dict()], "r": r}


def witness_sets(witness: Dict[str, Any]):
    """Rebuild (E, F, r) from a search witness."""
    if witness["kind"] == "slices":
        E = [LevelSlice.from_dict(d) for d in witness["E"]]
        F = [LevelSlice.from_dict(d) for d in witness["F"]]
    else:
        E = frozenset(Vertex(tuple(path)) for path in witness["E"])
        F = frozenset(Vertex(tuple(path)) for path in witness["F"])
    return E, F, witness["r"]


def _leftmost(depth: int) -> Vertex:
    return Vertex((0,) * depth)


def _f_root_representatives(depth: int, e_root_depth: int) -> List[Vertex]:
    """One F root per common-prefix length with the leftmost E root."""
    roots = [_leftmost(depth)]
    for t in range(min(depth, e_root_depth)):
        roots.append(Vertex((0,) * t + (1,) + (0,) * (depth - t - 1)))
    return roots


def _slice_candidates(tree: KaryTree, depth: int, level: bool):
    vertices = tree.materialize(depth) if not level else None
    for j_e in range(depth + 1):
        e_roots = [_leftmost(d) for d in range(j_e + 1)] if level else [x for x in vertices if x.depth <= j_e]
        for e_root in e_roots:
            e = LevelSlice(e_root, j_e)
            for j_f in range(depth + 1):
                if level:
                    f_roots = [
                        root
                        for d in range(j_f + 1)
                        for root in _f_root_representatives(d, e_root.depth)
                    ]
                else:
                    f_roots = [y for y in vertices if y.depth <= j_f]
                for f_root in f_roots:
                    yield e, LevelSlice(f_root, j_f)


def _search_slices(tree, pair, params, depth, r_max, budget, best) -> None:
    level = as_weight(pair.u).is_level and as_weight(pair.v).is_level
    for e, f in _slice_candidates(tree, depth, level):
        for r in range(r_max + 1):
            if not abs(e.depth - f.depth) <= r <= e.depth + f.depth or (e.depth + f.depth + r) % 2:
                continue
            if not budget.spend():
                return
            value = suffcond_ratio(tree, pair, params, e, f, r)
            best.offer(value, r, _slices_witness(e, f, r))


def _search_spheres(tree, pair, params, depth, r_max, budget, best) -> None:
    level = as_weight(pair.u).is_level and as_weight(pair.v).is_level
    centers = [_leftmost(d) for d in range(depth + 1)] if level else tree.materialize(depth)
    for x in centers:
        E = frozenset([x])
        for r in range(r_max + 1):
            F = tree.enumerate_sphere(x, r, depth)
            if not F:
                continue
            if not budget.spend():
                return
            best.offer_sets(suffcond_ratio(tree, pair, params, E, F, r), E, F, r, "sphere")


def _search_random(tree, pair, params, depth, r_max, budget, best, rng, samples) -> None:
    vertices = tree.materialize(depth)
    largest = min(MAX_RANDOM_SET_SIZE, len(vertices))
    for _ in range(samples):
        if not budget.spend():
            return
        e_idx = rng.choice(len(vertices), size=int(rng.integers(1, largest + 1)), replace=False)
        f_idx = rng.choice(len(vertices), size=int(rng.integers(1, largest + 1)), replace=False)
        r = int(rng.integers(0, r_max + 1))
        E = frozenset(vertices[i] for i in e_idx)
        F = frozenset(vertices[i] for i in f_idx)
        best.offer_sets(suffcond_ratio(tree, pair, params, E, F, r), E, F, r, "random")


def _search_greedy(tree, pair, params, depth, budget, best, steps) -> None:
    """Grow the best finite witness one vertex at a time while the ratio improves."""
    if best.sets_witness is None or steps <= 0:
        return
    E, F, r = best.sets_witness
    u, v = as_weight(pair.u), as_weight(pair.v)
    k = tree.k
    theta = float(params.alpha / params.p)
    beta = float(params.beta)
    vertices = tree.materialize(depth)

    def log_ratio(pair_mass, mass_e, mass_f):
        if pair_mass <= 0:
            return NEG_INF
        return logk(pair_mass, k) - r * beta - theta * logk(mass_e, k) - (1 - theta) * logk(mass_f, k)

    pair_mass = sum(u.value(y, k) for x in E for y in F if distance(x, y) == r)
    mass_e = sum(v.value(x, k) for x in E)
    mass_f = sum(u.value(y, k) for y in F)
    current = log_ratio(pair_mass, mass_e, mass_f)
    for _ in range(steps):
        choice = None
        for z in vertices:
            if z not in E:
                if not budget.spend():
                    break
                gain = sum(u.value(y, k) for y in F if distance(z, y) == r)
                value = log_ratio(pair_mass + gain, mass_e + v.value(z, k), mass_f)
                if value > current and (choice is None or value > choice[0]):
                    choice = (value, "E", z, gain)
            if z not in F:
                if not budget.spend():
                    break
                hits = sum(1 for x in E if distance(x, z) == r)
                gain = hits * u.value(z, k)
                value = log_ratio(pair_mass + gain, mass_e, mass_f + u.value(z, k))
                if value > current and (choice is None or value > choice[0]):
                    choice = (value, "F", z, gain)
        if choice is None:
            break
        current, side, z, gain = choice
        pair_mass += gain
        if side == "E":
            E = E | {z}
            mass_e += v.value(z, k)
        else:
            F = F | {z}
            mass_f += u.value(z, k)
        logging.debug(f"Greedy step added {z} to {side}: ratio {current:.6f} (log_k)")
        if budget.exhausted:
            break
    best.offer_sets(suffcond_ratio(tree, pair, params, E, F, r), E, F, r, "greedy")


def extremal_search(
    tree: KaryTree,
    weights: Union[AnyWeight, WeightPair],
    params: ConditionParams,
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
    depth: int = 4,
    r_max: Optional[int] = None,
    greedy_steps: int = 8,
    random_samples: int = 64,
    families: Sequence[str] = FAMILIES,
) -> ConditionReport:
    """Estimate the best constant of the pair condition on the tree truncated at `depth`.

    Args:
        tree: The tree.
        weights: A weight, or a WeightPair (u, v) with u on F and v on E.
        params: Exponents carrying p, β and α.
        budget: Maximum number of (E, F, r) evaluations.
        seed: Seed of the random and greedy families.
        depth: Truncation depth of every candidate set.
        r_max: Largest radius; defaults to 2·depth.
        greedy_steps: Maximum number of greedy vertex additions.
        random_samples: Number of random (E, F, r) draws.
        families: Which candidate families to scan.

    Returns:
        A ConditionReport over radii, with a tagged witness.
    """
    params.require("p", "beta", "alpha")
    unknown = set(families) - set(FAMILIES)
    if unknown:
        raise ValueError(f"Unknown search families {sorted(unknown)}; expected a subset of {FAMILIES}")
    pair = as_pair(weights)
    r_max = 2 * depth if r_max is None else r_max
    tree.check_budget(depth)
    counter = _Budget(budget)
    best = _Best(per_radius=[NEG_INF] * (r_max + 1))
    rng = np.random.default_rng(seed)

    if "slices" in families:
        _search_slices(tree, pair, params, depth, r_max, counter, best)
    if "sphere" in families:
        _search_spheres(tree, pair, params, depth, r_max, counter, best)
    if "random" in families:
        _search_random(tree, pair, params, depth, r_max, counter, best, rng, random_samples)
    if "greedy" in families:
        _search_greedy(tree, pair, params, depth, counter, best, greedy_steps)

    if counter.exhausted:
        logging.warning(f"Extremal search stopped after exhausting its budget of {budget} evaluations")
    report = build_report(
        PAIR + "extremal",
        tree,
        params,
        {
            "depth": depth,
            "r_max": r_max,
            "seed": seed,
            "budget": budget,
            "evaluations": counter.used,
            "budget_exhausted": counter.exhausted,
            "families": list(families),
        },
        best.per_radius,
        best.witness,
    )
    logging.info(
        f"Extremal search: {counter.used} evaluations, sup={report.empirical_sup:.6g} verdict={report.verdict}"
    )
    return report


@condition_registry.register(PAIR + "extremal")
class ExtremalCondition(BaseCondition):
    """Pair condition estimated by the extremal-set search."""

    condition_id = PAIR + "extremal"

    def __init__(self, weights, params, budget=DEFAULT_BUDGET, seed=0, depth=4, r_max=None,
                 greedy_steps=8, random_samples=64):
        self._weights = weights
        self._params = params.require("p", "beta", "alpha")
        self._budget = budget
        self._seed = seed
        self._depth = depth
        self._r_max = r_max
        self._greedy_steps = greedy_steps
        self._random_samples = random_samples

    def get_condition_args(self) -> Dict[str, Any]:
        return {
            **self._params.to_dict(),
            "budget": self._budget,
            "seed": self._seed,
            "depth": self._depth,
            "r_max": self._r_max,
            "greedy_steps": self._greedy_steps,
            "random_samples": self._random_samples,
        }

    def check(self, tree: KaryTree) -> ConditionReport:
        return extremal_search(
            tree,
            self._weights,
            self._params,
            budget=self._budget,
            seed=self._seed,
            depth=self._depth,
            r_max=self._r_max,
            greedy_steps=self._greedy_steps,
            random_samples=self._random_samples,
        )

    def evaluate_witness(self, tree: KaryTree, witness: Dict[str, Any]) -> float:
        E, F, r = witness_sets(witness)
        return suffcond_ratio(tree, self._weights, self._params, E, F, r)


@condition_registry.register(PAIR + "suffcond")
class SuffCondCondition(ExtremalCondition):
    """Pair condition scanned over single level-slice pairs only."""

    condition_id = PAIR + "suffcond"

    def check(self, tree: KaryTree) -> ConditionReport:
        report = extremal_search(
            tree,
            self._weights,
            self._params,
            budget=self._budget,
            seed=self._seed,
            depth=self._depth,
            r_max=self._r_max,
            families=("slices",),
        )
        report.condition = self.condition_id
        return report
