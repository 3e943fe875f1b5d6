"""Shared fixtures."""

import pytest

from treemax.core.geometry import KaryTree


@pytest.fixture
def binary():
    return KaryTree(2)


@pytest.fixture
def ternary():
    return KaryTree(3)
