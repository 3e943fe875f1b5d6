"""Weighted maximal operators on the rooted k-ary tree.

This package computes spherical and ball maximal functions for level-dependent
weights, checks weight conditions numerically and reproduces the reference
experiments on power weights.
"""

from treemax.core import (
    AdmissibilityError,
    BaseCondition,
    ConditionParams,
    ConditionReport,
    KaryTree,
    LevelFunction,
    PowerWeight,
    SparseFunction,
    TableWeight,
    TreemaxError,
    Vertex,
    Weight,
    WeightPair,
    parse_weight,
)
from treemax.checkers import condition_registry
from treemax.experiments import ExperimentRunner, ResultTable, experiment_registry
from treemax.utils.config import RunConfig

__version__ = "1.0.0"

__all__ = [
    # Core
    'KaryTree',
    'Vertex',
    'PowerWeight',
    'TableWeight',
    'Weight',
    'WeightPair',
    'parse_weight',
    'LevelFunction',
    'SparseFunction',
    'BaseCondition',
    'ConditionParams',
    'ConditionReport',
    'TreemaxError',
    'AdmissibilityError',

    # Checkers and experiments
    'condition_registry',
    'ExperimentRunner',
    'ResultTable',
    'experiment_registry',

    # Utils
    'RunConfig',
]
