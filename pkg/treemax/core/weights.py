"""Weights on the k-ary tree.

Level weights depend only on the depth of a vertex and are stored in the
base-k log domain: `log_phi(j) = log_k φ(j)`. Power weights φ(j) = k^{a j}
keep their exponent `a` as an exact Fraction, so duals and pointwise
identities stay exact.
"""

import dataclasses
import math
import re
from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Tuple, Union

import immutabledict

from treemax.core.errors import AdmissibilityError, ConfigError
from treemax.core.geometry import KaryTree, Vertex
from treemax.utils.numeric import Number, as_fraction, k_pow, logk, logk_sum


class LevelWeight(ABC):
    """A positive weight whose value depends only on the depth of a vertex."""

    @abstractmethod
    def log_phi(self, j: int) -> float:
        """log_k of the weight on level j."""

    @abstractmethod
    def dual(self, p: Number) -> "LevelWeight":
        """The weight raised to the power -1/(p-1)."""

    @abstractmethod
    def log_sup_from(self, level: int) -> float:
        """log_k of sup_{i >= level} φ(i); +inf when the weight is unbounded."""

    @abstractmethod
    def descriptor(self) -> str:
        """Plain-text descriptor accepted by `parse_weight`."""

    def power(self, s: Number) -> "LevelWeight":
        """The weight raised to a real power s."""
        raise NotImplementedError

    def value(self, j: int, k: int) -> float:
        return k_pow(self.log_phi(j), k)

    def exact_value(self, j: int, k: int) -> Fraction:
        """φ(j) as an exact rational; only available when log_k φ(j) is an integer."""
        raise ValueError(f"{self.descriptor()} has no exact value on level {j}")


@dataclasses.dataclass(frozen=True)
class PowerWeight(LevelWeight):
    """φ(j) = k^{a j}."""
    a: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", as_fraction(self.a))

    def log_phi(self, j: int) -> float:
        return float(self.a * j)

    def dual(self, p: Number) -> "PowerWeight":
        p = as_fraction(p)
        if p <= 1:
            raise AdmissibilityError("p > 1", f"p={p}")
        return PowerWeight(-self.a / (p - 1))

    def power(self, s: Number) -> "PowerWeight":
        return PowerWeight(self.a * as_fraction(s))

    def log_sup_from(self, level: int) -> float:
        if self.a > 0:
            return float("inf")
        return float(self.a * level)

    def exact_value(self, j: int, k: int) -> Fraction:
        exponent = self.a * j
        if exponent.denominator != 1:
            raise ValueError(f"k^({exponent}) is not rational")
        return Fraction(k) ** int(exponent)

    def descriptor(self) -> str:
        return f"power:a={self.a}"


@dataclasses.dataclass(frozen=True)
class TableWeight(LevelWeight):
    """Explicit log_k values on levels 0..n-1, continued geometrically with the last ratio."""
    log_values: Tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.log_values)
        if not values:
            raise ConfigError("A table weight needs at least one level")
        if not all(math.isfinite(v) for v in values):
            raise ConfigError("Table weight values must be finite")
        object.__setattr__(self, "log_values", values)

    @property
    def tail_slope(self) -> float:
        if len(self.log_values) < 2:
            return 0.0
        return self.log_values[-1] - self.log_values[-2]

    def log_phi(self, j: int) -> float:
        n = len(self.log_values)
        if j < n:
            return self.log_values[j]
        return self.log_values[-1] + (j - n + 1) * self.tail_slope

    def dual(self, p: Number) -> "TableWeight":
        if p <= 1:
            raise AdmissibilityError("p > 1", f"p={p}")
        return TableWeight(tuple(-v / (float(p) - 1) for v in self.log_values))

    def power(self, s: Number) -> "TableWeight":
        return TableWeight(tuple(float(s) * v for v in self.log_values))

    def log_sup_from(self, level: int) -> float:
        if self.tail_slope > 0:
            return float("inf")
        n = len(self.log_values)
        if level >= n:
            return self.log_phi(level)
        return max(self.log_values[level:])

    def exact_value(self, j: int, k: int) -> Fraction:
        value = self.log_phi(j)
        if value != int(value):
            raise ValueError(f"k^({value}) is not rational")
        return Fraction(k) ** int(value)

    def descriptor(self) -> str:
        return "table:[" + ",".join(repr(v) for v in self.log_values) + "]"


@dataclasses.dataclass(frozen=True)
class Weight:
    """A level weight with finitely many vertex overrides inside a truncation depth.

    Overrides hold positive linear values.
    """
    base: LevelWeight
    overrides: Mapping[Vertex, float] = dataclasses.field(
        default_factory=immutabledict.immutabledict
    )
    truncation: Optional[int] = None

    def __post_init__(self):
        overrides = immutabledict.immutabledict(self.overrides)
        for vertex, value in overrides.items():
            if not value > 0:
                raise ValueError(f"Weight override at {vertex} must be positive, got {value}")
            if self.truncation is not None and vertex.depth > self.truncation:
                raise ValueError(
                    f"Override at depth {vertex.depth} lies outside truncation {self.truncation}"
                )
        object.__setattr__(self, "overrides", overrides)

    @property
    def is_level(self) -> bool:
        return not self.overrides

    def log_value(self, x: Vertex, k: int) -> float:
        if x in self.overrides:
            return logk(self.overrides[x], k)
        return self.base.log_phi(x.depth)

    def value(self, x: Vertex, k: int) -> float:
        if x in self.overrides:
            return float(self.overrides[x])
        return self.base.value(x.depth, k)

    def exact_value(self, x: Vertex, k: int) -> Fraction:
        if x in self.overrides:
            return as_fraction(self.overrides[x])
        return self.base.exact_value(x.depth, k)

    def dual(self, p: Number) -> "Weight":
        exponent = -1 / (float(p) - 1)
        return Weight(
            self.base.dual(p),
            {x: v ** exponent for x, v in self.overrides.items()},
            self.truncation,
        )


AnyWeight = Union[LevelWeight, Weight]


def as_weight(w: AnyWeight) -> Weight:
    return w if isinstance(w, Weight) else Weight(w)


@dataclasses.dataclass(frozen=True)
class WeightPair:
    """Two weights (u, v): u measures targets F, v measures sources E."""
    u: AnyWeight
    v: AnyWeight

    def dual(self, p: Number) -> "WeightPair":
        return WeightPair(self.u.dual(p), self.v.dual(p))

    def swapped(self) -> "WeightPair":
        return WeightPair(self.v, self.u)

    @property
    def is_diagonal(self) -> bool:
        return self.u == self.v


def as_pair(weights: Union[AnyWeight, WeightPair]) -> WeightPair:
    if isinstance(weights, WeightPair):
        return weights
    return WeightPair(weights, weights)


def dual_weight(w: LevelWeight, p: Number) -> LevelWeight:
    """σ_p = w^{-1/(p-1)}; power weights map to power weights exactly."""
    return w.dual(p)


def level_mass(tree: KaryTree, w: LevelWeight, j: int) -> float:
    """log_k w(T_j) = j + log_k φ(j)."""
    return j + w.log_phi(j)


def sphere_weight(tree: KaryTree, w: LevelWeight, j: int, r: int) -> float:
    """log_k w(S(x, r)) for any x of depth j."""
    return logk_sum(
        (
            tree.log_sphere_level_count(j, r, s.up_steps) + w.log_phi(s.target_depth)
            for s in tree.sphere_slices(j, r)
        ),
        tree.k,
    )


def sphere_weight_exact(tree: KaryTree, w: LevelWeight, j: int, r: int) -> Fraction:
    """w(S(x, r)) as an exact rational, for weights with integral log values."""
    return sum(
        (s.count * w.exact_value(s.target_depth, tree.k) for s in tree.sphere_slices(j, r)),
        Fraction(0),
    )


def ball_weight(tree: KaryTree, w: LevelWeight, j: int, r: int) -> float:
    """log_k w(B(x, r)) for any x of depth j."""
    return logk_sum((sphere_weight(tree, w, j, s) for s in range(r + 1)), tree.k)


def set_weight(tree: KaryTree, w: AnyWeight, vertices: Iterable[Vertex], exact: bool = False):
    """w(S) = Σ_{x ∈ S} w(x); a Fraction when `exact`, a float otherwise."""
    w = as_weight(w)
    if exact:
        return sum((w.exact_value(x, tree.k) for x in vertices), Fraction(0))
    return math.fsum(w.value(x, tree.k) for x in vertices)


def log_set_weight(tree: KaryTree, w: AnyWeight, vertices: Iterable[Vertex]) -> float:
    w = as_weight(w)
    return logk_sum((w.log_value(x, tree.k) for x in vertices), tree.k)


def pointwise_identity_gap(w: LevelWeight, p: Number, j: int) -> float:
    """log_k(σ^p w) - log_k σ on level j; zero for every level weight."""
    sigma = w.dual(p)
    return float(p) * sigma.log_phi(j) + w.log_phi(j) - sigma.log_phi(j)


_POWER_RE = re.compile(r"^power:a=(?P<a>[-+0-9./]+)$")
_TABLE_RE = re.compile(r"^table:\[(?P<values>[^\]]*)\]$")


def parse_weight(descriptor: str) -> LevelWeight:
    """Parse `power:a=<rational>` or `table:[v0,v1,...]` (log_k values)."""
    text = descriptor.strip().replace(" ", "")
    match = _POWER_RE.match(text)
    if match:
        try:
            return PowerWeight(Fraction(match.group("a")))
        except (ValueError, ZeroDivisionError) as e:
            raise ConfigError(f"Bad power exponent in weight descriptor {descriptor!r}: {e}")
    match = _TABLE_RE.match(text)
    if match:
        try:
            values = tuple(float(v) for v in match.group("values").split(",") if v)
        except ValueError as e:
            raise ConfigError(f"Bad table in weight descriptor {descriptor!r}: {e}")
        return TableWeight(values)
    raise ConfigError(
        f"Unknown weight descriptor {descriptor!r}; expected 'power:a=<a>' or 'table:[...]'"
    )
