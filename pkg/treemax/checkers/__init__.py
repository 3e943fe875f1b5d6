"""Concrete weight-condition checkers.

Importing this package registers every checker in `condition_registry`.
"""

from treemax.checkers.registry import LEVEL, PAIR, TESTING, condition_registry
from treemax.checkers.pairs import (
    LevelSlice,
    calibrate_sum_levels,
    corsuff_pairing_bound,
    necessity_chain,
    pair_measure,
    pairing_constant,
    rho_grid_check,
    rho_optimize,
    suffcond_ratio,
    sum_levels_corpus,
    sum_levels_violations,
)
from treemax.checkers.levels import (
    ApCondition,
    LevelwiseCondition,
    MsCondition,
    ap_constant,
    levelwise_condition_sup,
    ms_bound,
)
from treemax.checkers.sawyer import SawyerCondition, sawyer_testing_constant
from treemax.checkers.search import ExtremalCondition, SuffCondCondition, extremal_search

__all__ = [
    'LEVEL',
    'PAIR',
    'TESTING',
    'condition_registry',

    # Pair measures
    'LevelSlice',
    'pair_measure',
    'suffcond_ratio',
    'corsuff_pairing_bound',
    'pairing_constant',
    'rho_optimize',
    'rho_grid_check',
    'necessity_chain',
    'sum_levels_corpus',
    'calibrate_sum_levels',
    'sum_levels_violations',

    # Checkers
    'LevelwiseCondition',
    'ApCondition',
    'MsCondition',
    'SawyerCondition',
    'ExtremalCondition',
    'SuffCondCondition',
    'levelwise_condition_sup',
    'ap_constant',
    'ms_bound',
    'sawyer_testing_constant',
    'extremal_search',
]
