"""Combinatorics of the infinite rooted k-ary tree.

Vertices are addressed by their root path. Cardinalities of spheres, balls and
their intersections with levels come from closed forms; `enumerate_sphere` is a
breadth-first oracle on the truncated tree that backs those closed forms.
"""

import dataclasses
import functools
import itertools
from typing import Iterator, List, Sequence, Tuple

from absl import logging

from treemax.core.errors import AdmissibilityError, BudgetExceededError
from treemax.utils.numeric import logk

# 2^20 materialized nodes.
DEFAULT_ENUMERATION_BUDGET = 1 << 20


@dataclasses.dataclass(frozen=True, order=True)
class Vertex:
    """A tree vertex given by the child indices on its path from the root."""
    path: Tuple[int, ...] = ()

    def __post_init__(self):
        if not isinstance(self.path, tuple):
            object.__setattr__(self, "path", tuple(self.path))
        if any(digit < 0 for digit in self.path):
            raise ValueError(f"Negative child index in path {self.path}")

    @classmethod
    def root(cls) -> "Vertex":
        return cls(())

    @property
    def depth(self) -> int:
        return len(self.path)

    def child(self, index: int) -> "Vertex":
        return Vertex(self.path + (index,))

    def parent(self) -> "Vertex":
        if not self.path:
            raise ValueError("The root has no parent")
        return Vertex(self.path[:-1])

    def ancestor(self, m: int) -> "Vertex":
        """The m-th parent of this vertex."""
        if m < 0 or m > self.depth:
            raise ValueError(f"Vertex of depth {self.depth} has no ancestor {m} levels up")
        return Vertex(self.path[: self.depth - m])

    def is_ancestor_of(self, other: "Vertex") -> bool:
        return other.path[: self.depth] == self.path

    def __str__(self) -> str:
        return "root" if not self.path else "/".join(str(d) for d in self.path)


@dataclasses.dataclass(frozen=True)
class SphereLevelSlice:
    """The part of S(x, r) lying on level i = j + r - 2m, for x in T_j."""
    center_depth: int
    radius: int
    up_steps: int
    count: int

    @property
    def target_depth(self) -> int:
        return self.center_depth + self.radius - 2 * self.up_steps


def common_prefix_length(a: Sequence[int], b: Sequence[int]) -> int:
    n = 0
    for da, db in zip(a, b):
        if da != db:
            break
        n += 1
    return n


def distance(x: Vertex, y: Vertex) -> int:
    """Number of edges on the path between x and y."""
    return x.depth + y.depth - 2 * common_prefix_length(x.path, y.path)


@dataclasses.dataclass(frozen=True)
class KaryTree:
    """The infinite rooted k-ary tree, with a node budget for materialized oracles."""
    k: int
    budget: int = DEFAULT_ENUMERATION_BUDGET

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 2:
            raise AdmissibilityError("k >= 2", f"k={self.k}")

    # Vertices

    def vertex(self, path: Sequence[int]) -> Vertex:
        """Build a vertex, checking every digit is a valid child index."""
        path = tuple(path)
        for digit in path:
            if not 0 <= digit < self.k:
                raise ValueError(f"Child index {digit} out of range for k={self.k}")
        return Vertex(path)

    def validate(self, x: Vertex) -> Vertex:
        return self.vertex(x.path)

    def children(self, x: Vertex) -> List[Vertex]:
        return [x.child(i) for i in range(self.k)]

    def level(self, j: int) -> Iterator[Vertex]:
        """Iterate T_j in lexicographic order."""
        self.check_budget(j)
        for path in itertools.product(range(self.k), repeat=j):
            yield Vertex(path)

    def level_size(self, j: int) -> int:
        return self.k ** j

    def node_count(self, depth_limit: int) -> int:
        """Number of vertices of the tree truncated at depth_limit."""
        return (self.k ** (depth_limit + 1) - 1) // (self.k - 1)

    def check_budget(self, depth_limit: int) -> None:
        nodes = self.node_count(depth_limit)
        if nodes > self.budget:
            raise BudgetExceededError(
                f"Truncation at depth {depth_limit} has {nodes} nodes for k={self.k}, "
                f"budget is {self.budget}"
            )

    def materialize(self, depth_limit: int) -> List[Vertex]:
        """All vertices of depth at most depth_limit, level by level."""
        self.check_budget(depth_limit)
        vertices: List[Vertex] = []
        for j in range(depth_limit + 1):
            vertices.extend(self.level(j))
        return vertices

    def descendants(self, x: Vertex, depth: int) -> Iterator[Vertex]:
        """Descendants of x lying on level `depth` (x itself when depth == x.depth)."""
        if depth < x.depth:
            return
        self.check_budget(depth - x.depth)
        for tail in itertools.product(range(self.k), repeat=depth - x.depth):
            yield Vertex(x.path + tail)

    # Closed forms

    @functools.lru_cache(maxsize=None)
    def sphere_level_count(self, j: int, r: int, m: int) -> int:
        """|T_{j+r-2m} ∩ S(x, r)| for any x of depth j."""
        if j < 0 or r < 0 or m < 0 or m > min(r, j):
            return 0
        if m == 0:
            return self.k ** r
        if m == r:
            return 1
        return (self.k - 1) * self.k ** (r - m - 1)

    def sphere_slices(self, j: int, r: int) -> List[SphereLevelSlice]:
        """The nonempty level slices of a sphere of radius r around a depth-j vertex."""
        return [
            SphereLevelSlice(j, r, m, self.sphere_level_count(j, r, m))
            for m in range(min(r, j) + 1)
        ]

    @functools.lru_cache(maxsize=None)
    def sphere_size(self, j: int, r: int) -> int:
        return sum(self.sphere_level_count(j, r, m) for m in range(min(r, j) + 1))

    @functools.lru_cache(maxsize=None)
    def ball_size(self, j: int, r: int) -> int:
        if r == 0:
            return 1
        return self.ball_size(j, r - 1) + self.sphere_size(j, r)

    def log_sphere_level_count(self, j: int, r: int, m: int) -> float:
        return logk(self.sphere_level_count(j, r, m), self.k)

    def log_sphere_size(self, j: int, r: int) -> float:
        return logk(self.sphere_size(j, r), self.k)

    def log_ball_size(self, j: int, r: int) -> float:
        return logk(self.ball_size(j, r), self.k)

    # Oracle

    def neighbours(self, x: Vertex, depth_limit: int) -> List[Vertex]:
        result = [x.parent()] if x.depth > 0 else []
        if x.depth < depth_limit:
            result.extend(self.children(x))
        return result

    def enumerate_sphere(self, x: Vertex, r: int, depth_limit: int) -> frozenset:
        """Exact S(x, r) inside the tree truncated at depth_limit, by breadth-first search."""
        self.validate(x)
        if x.depth + r > depth_limit:
            logging.debug(
                f"Sphere of radius {r} around depth-{x.depth} vertex is clipped at depth {depth_limit}"
            )
        self.check_budget(depth_limit)
        frontier = {x}
        seen = {x}
        for _ in range(r):
            nxt = set()
            for v in frontier:
                for u in self.neighbours(v, depth_limit):
                    if u not in seen:
                        seen.add(u)
                        nxt.add(u)
            frontier = nxt
        return frozenset(frontier)

    def enumerate_ball(self, x: Vertex, r: int, depth_limit: int) -> frozenset:
        ball = set()
        for s in range(r + 1):
            ball |= self.enumerate_sphere(x, s, depth_limit)
        return frozenset(ball)
