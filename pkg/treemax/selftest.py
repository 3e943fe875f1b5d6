"""Oracle-equivalence suites behind the `--selftest` flag.

Each suite compares a closed-form or fast path against brute-force
enumeration on small trees and returns one CheckResult per comparison.
"""

from fractions import Fraction
from typing import Callable, List, NamedTuple

import immutabledict
import numpy as np
from absl import logging

from treemax.checkers.pairs import LevelSlice, pair_measure, rho_grid_check
from treemax.core.geometry import KaryTree, Vertex
from treemax.core.operators import (
    SparseFunction,
    maximal_ball,
    maximal_sphere,
    oracle_maximal,
    oracle_sphere_average,
    sphere_average,
)
from treemax.core.weights import PowerWeight
from treemax.experiments.runner import crosscheck_ms_profile, strong_partial_sums


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str = ""


def geometry_suite(max_total: int = 6) -> List[CheckResult]:
    """Closed-form sphere and ball cardinalities against breadth-first enumeration."""
    results = []
    for k in (2, 3):
        tree = KaryTree(k)
        mismatches = []
        for j in range(max_total + 1):
            x = Vertex((0,) * j)
            for r in range(max_total - j + 1):
                sphere = tree.enumerate_sphere(x, r, j + r)
                for m in range(min(r, j) + 1):
                    count = sum(1 for y in sphere if y.depth == j + r - 2 * m)
                    if count != tree.sphere_level_count(j, r, m):
                        mismatches.append((j, r, m))
                if len(sphere) != tree.sphere_size(j, r):
                    mismatches.append((j, r, "sphere"))
                if len(tree.enumerate_ball(x, r, j + r)) != tree.ball_size(j, r):
                    mismatches.append((j, r, "ball"))
        results.append(CheckResult(f"geometry k={k}", not mismatches, str(mismatches[:5])))
    return results


def operators_suite(instances: int = 50, seed: int = 0) -> List[CheckResult]:
    """Sparse-path averages and maximal functions against the enumeration oracle."""
    rng = np.random.default_rng(seed)
    tree = KaryTree(2)
    failures = []
    for index in range(instances):
        support = {}
        for _ in range(int(rng.integers(1, 4))):
            depth = int(rng.integers(0, 4))
            support[Vertex(tuple(int(d) for d in rng.integers(0, 2, size=depth)))] = int(rng.integers(1, 5))
        f = SparseFunction(support)
        x = Vertex(tuple(int(d) for d in rng.integers(0, 2, size=int(rng.integers(0, 4)))))
        r = int(rng.integers(0, 4))
        if sphere_average(tree, f, x, r, exact=True) != oracle_sphere_average(tree, f, x, r):
            failures.append((index, "sphere average"))
        fast = maximal_sphere(tree, f, x, exact=True).value
        if fast != oracle_maximal(tree, f, x, "sphere").value:
            failures.append((index, "sphere maximal"))
        if maximal_ball(tree, f, x, exact=True).value > fast:
            failures.append((index, "Mf <= M°f"))
    return [CheckResult("operators oracle", not failures, str(failures[:5]))]


def conditions_suite() -> List[CheckResult]:
    """Slice fast path of the pair measure against brute force, and ρ* against a grid."""
    tree = KaryTree(2)
    w = PowerWeight(1)
    mismatches = []
    slices = [
        LevelSlice(Vertex(()), 2),
        LevelSlice(Vertex((0,)), 3),
        LevelSlice(Vertex((1, 0)), 3),
        LevelSlice(Vertex(()), 4),
    ]
    for e in slices:
        for f in slices:
            for r in range(8):
                fast = pair_measure(tree, w, e, f, r, exact=True)
                brute = pair_measure(tree, w, e.vertices(tree), f.vertices(tree), r, exact=True)
                if fast != brute:
                    mismatches.append((e, f, r))
    results = [CheckResult("pair measure slices", not mismatches, str(mismatches[:3]))]
    check = rho_grid_check(2, 0, 1.0, 1.0, 2.0, span=1.0, step=1e-2)
    results.append(
        CheckResult("rho grid", check.min_relative_gap >= -1e-9 and check.convex, f"gap={check.min_relative_gap:.3e}")
    )
    return results


def experiments_suite() -> List[CheckResult]:
    """Short versions of the experiment cross-checks."""
    tree = KaryTree(2)
    results = []
    gap = crosscheck_ms_profile(tree, PowerWeight(Fraction(-3, 4)), Fraction(6, 5), j_check=4)
    results.append(CheckResult("M_s profile", gap <= 1e-9, f"gap={gap:.3e}"))
    sums = strong_partial_sums(tree, PowerWeight(1), 2, 2, (5, 10))
    results.append(CheckResult("strong partial sums increase", sums[10] > sums[5], str(sums)))
    return results


SUITES = immutabledict.immutabledict({
    "geometry": geometry_suite,
    "operators": operators_suite,
    "conditions": conditions_suite,
    "experiments": experiments_suite,
})


def run_suites(names: List[str]) -> List[CheckResult]:
    """Run the named suites and log every failed check."""
    results: List[CheckResult] = []
    for name in names:
        suite: Callable[[], List[CheckResult]] = SUITES[name]
        results.extend(suite())
    for result in results:
        if result.passed:
            logging.info(f"selftest {result.name}: ok")
        else:
            logging.warning(f"selftest {result.name}: FAILED {result.detail}")
    return results
