"""Base classes for weight-condition checkers and their reports."""

import dataclasses
import json
import math
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from treemax.core.errors import AdmissibilityError
from treemax.core.geometry import KaryTree
from treemax.utils.numeric import NEG_INF, Number, fit_slope, k_pow, logk

VERDICTS = ("bounded", "growing", "diverged")

DEFAULT_SLOPE_TOL = 0.02
DEFAULT_BOUNDED_TOL = 0.01
DEFAULT_WINDOW = 10


@dataclasses.dataclass(frozen=True)
class ConditionParams:
    """Exponents (p, q, β, α, δ, s) of the weight conditions; unused ones stay None."""
    p: Optional[Number] = None
    q: Optional[Number] = None
    beta: Optional[Number] = None
    alpha: Optional[Number] = None
    delta: Optional[Number] = None
    s: Optional[Number] = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        """Check every admissibility condition whose exponents are set.

        Raises:
            AdmissibilityError: Naming the first violated condition.
        """
        p, q, beta, alpha = self.p, self.q, self.beta, self.alpha
        if p is not None and not p > 1:
            raise AdmissibilityError("p > 1", f"p={p}")
        if q is not None:
            if p is None or not q >= p:
                raise AdmissibilityError("q >= p", f"q={q}, p={p}")
        if beta is not None and not 0 < beta < 1:
            raise AdmissibilityError("0 < beta < 1", f"beta={beta}")
        if alpha is not None:
            if beta is None or not alpha >= beta:
                raise AdmissibilityError("beta <= alpha", f"alpha={alpha}, beta={beta}")
            if p is None or not alpha < p:
                raise AdmissibilityError("alpha < p", f"alpha={alpha}, p={p}")
        if self.delta is not None and not self.delta < 1:
            raise AdmissibilityError("delta < 1", f"delta={self.delta}")
        if self.s is not None and not self.s >= 1:
            raise AdmissibilityError("s >= 1", f"s={self.s}")

    def require(self, *names: str) -> "ConditionParams":
        """Raise AdmissibilityError unless every named exponent is set."""
        for name in names:
            if getattr(self, name) is None:
                raise AdmissibilityError(f"{name} given", "missing exponent")
        return self

    @property
    def s_prime(self) -> float:
        """The conjugate exponent s' = s/(s-1)."""
        self.require("s")
        if self.s == 1:
            return math.inf
        return self.s / (self.s - 1)

    @property
    def weak_exponent(self) -> float:
        """(β/α)·p, the exponent of the weak-type estimate."""
        self.require("p", "beta", "alpha")
        return self.beta * self.p / self.alpha

    def to_dict(self) -> Dict[str, float]:
        return {
            f.name: float(getattr(self, f.name))
            for f in dataclasses.fields(self)
            if getattr(self, f.name) is not None
        }


def levelwise_pair_exponents(p: Number, delta: Number, q: Optional[Number] = None) -> ConditionParams:
    """Pair-condition exponents implied by the level-wise condition with exponent δ.

    β = α = p/(p-δ+1) for the weak type at p; α = q/(p-δ+1) for the strong
    type at q > p.
    """
    ConditionParams(p=p, delta=delta)
    denom = p - delta + 1
    beta = p / denom
    alpha = (q if q is not None else p) / denom
    return ConditionParams(p=p, q=q, beta=beta, alpha=alpha, delta=delta)


def a1ap_exponents(s: Number, p: Number) -> ConditionParams:
    """Pair-condition exponents of a weight with M_s w ≲ w.

    With s' = s/(s-1): β = s'/(s'+1) and α = s'p/(s'+1), so (β/α)p = 1.
    """
    base = ConditionParams(p=p, s=s)
    if s == 1:
        raise AdmissibilityError("s > 1", "the pair exponents need a finite s'")
    s_prime = base.s_prime
    return ConditionParams(
        p=p, beta=s_prime / (s_prime + 1), alpha=s_prime * p / (s_prime + 1), s=s
    )


def classify_growth(
    values_logk: Sequence[float],
    k: int,
    slope_tol: float = DEFAULT_SLOPE_TOL,
    bounded_tol: float = DEFAULT_BOUNDED_TOL,
    window: int = DEFAULT_WINDOW,
) -> str:
    """Verdict for a log_k sequence indexed by a grid parameter.

    "diverged" on +inf or NaN entries. Otherwise the running sup is
    "growing" when its least-squares slope over the last two-thirds
    exceeds `slope_tol` and its increase over the last `window` steps
    exceeds `bounded_tol` relative; "bounded" in every other case.
    """
    values = np.asarray(list(values_logk), dtype=float)
    if np.any(np.isnan(values)) or np.any(values == np.inf):
        return "diverged"
    finite = np.isfinite(values)
    if not finite.any():
        return "bounded"
    values = values[int(np.argmax(finite)):]
    running = np.maximum.accumulate(values)
    if running.size < 2:
        return "bounded"
    slope = fit_slope(np.arange(running.size), running)
    span = min(window, running.size - 1)
    increase = k_pow(float(running[-1] - running[-1 - span]), k) - 1
    if slope > slope_tol and increase > bounded_tol:
        return "growing"
    return "bounded"


def running_sup(values_logk: Sequence[float]) -> List[float]:
    result = []
    best = NEG_INF
    for v in values_logk:
        if v > best or math.isnan(v):
            best = v
        result.append(best)
    return result


@dataclasses.dataclass
class ConditionReport:
    """Outcome of one checker run: best constant found, its witness and the grid."""
    condition: str
    k: int
    params: Dict[str, Any]
    grid: Dict[str, Any]
    empirical_sup_logk: float
    witness: Dict[str, Any]
    verdict: str
    running_sup_logk: List[float] = dataclasses.field(default_factory=list)
    metadata: Dict[str, Any] = dataclasses.field(default_factory=dict)

    @property
    def empirical_sup(self) -> float:
        return k_pow(self.empirical_sup_logk, self.k)

    def violates(self, constant: float) -> bool:
        """Assert-mode check against a supplied constant."""
        if self.verdict == "diverged" or math.isnan(self.empirical_sup_logk):
            return True
        return self.empirical_sup_logk > logk(constant, self.k) + 1e-12

    def to_dict(self) -> Dict[str, Any]:
        return {
            "condition": self.condition,
            "k": self.k,
            "params": dict(self.params),
            "grid": dict(self.grid),
            "empirical_sup_logk": self.empirical_sup_logk,
            "witness": dict(self.witness),
            "verdict": self.verdict,
            "running_sup_logk": list(self.running_sup_logk),
            "metadata": dict(self.metadata),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=4, sort_keys=True)


def build_report(
    condition: str,
    tree: KaryTree,
    params: ConditionParams,
    grid: Dict[str, Any],
    values_by_index: Sequence[float],
    witness: Dict[str, Any],
    metadata: Optional[Dict[str, Any]] = None,
    slope_tol: float = DEFAULT_SLOPE_TOL,
    bounded_tol: float = DEFAULT_BOUNDED_TOL,
) -> ConditionReport:
    """Assemble a report from per-grid-index best values (log_k)."""
    sup_curve = running_sup(values_by_index)
    sup = sup_curve[-1] if sup_curve else NEG_INF
    return ConditionReport(
        condition=condition,
        k=tree.k,
        params=params.to_dict(),
        grid=dict(grid),
        empirical_sup_logk=sup,
        witness=dict(witness),
        verdict=classify_growth(values_by_index, tree.k, slope_tol, bounded_tol),
        running_sup_logk=sup_curve,
        metadata=dict(metadata or {}),
    )


class BaseCondition(ABC):
    """Base class for all weight-condition checkers."""

    condition_id: str = ""

    @abstractmethod
    def check(self, tree: KaryTree) -> ConditionReport:
        """Scan the checker's grid.

        Args:
            tree: The k-ary tree to evaluate on.

        Returns:
            A ConditionReport with the empirical sup and its witness.
        """

    @abstractmethod
    def evaluate_witness(self, tree: KaryTree, witness: Dict[str, Any]) -> float:
        """Recompute the log_k value of the quantity at a reported witness."""

    def get_condition_args(self) -> Dict[str, Any]:
        """Returns the keyword args of the checker."""
        return {}
