"""Registered experiments and their result tables."""

from treemax.experiments.tables import ResultTable, report_table
from treemax.experiments.runner import ExperimentRunner, experiment_registry

__all__ = ['ResultTable', 'report_table', 'ExperimentRunner', 'experiment_registry']
