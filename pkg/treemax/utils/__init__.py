"""Utility functions for treemax."""

from treemax.utils.numeric import as_fraction, fit_slope, k_pow, logk, logk_sum

__all__ = ['as_fraction', 'fit_slope', 'k_pow', 'logk', 'logk_sum']
