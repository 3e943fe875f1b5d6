"""Core module: tree geometry, weights, operators and condition reports."""

from treemax.core.errors import (
    AdmissibilityError,
    BudgetExceededError,
    ConfigError,
    CrossCheckError,
    HorizonError,
    TreemaxError,
)
from treemax.core.geometry import KaryTree, Vertex, distance
from treemax.core.weights import PowerWeight, TableWeight, Weight, WeightPair, parse_weight
from treemax.core.operators import LevelFunction, SparseFunction, maximal_ball, maximal_sphere
from treemax.core.conditions import BaseCondition, ConditionParams, ConditionReport
from treemax.core.registry import Registry

__all__ = [
    'TreemaxError',
    'AdmissibilityError',
    'BudgetExceededError',
    'ConfigError',
    'CrossCheckError',
    'HorizonError',
    'KaryTree',
    'Vertex',
    'distance',
    'PowerWeight',
    'TableWeight',
    'Weight',
    'WeightPair',
    'parse_weight',
    'LevelFunction',
    'SparseFunction',
    'maximal_sphere',
    'maximal_ball',
    'BaseCondition',
    'ConditionParams',
    'ConditionReport',
    'Registry',
]
