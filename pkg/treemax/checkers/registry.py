"""The registry every concrete checker is registered in."""

from treemax.core.registry import Registry

condition_registry = Registry("condition")

# Checker ID prefixes
PAIR = "pair:"
LEVEL = "level:"
TESTING = "testing:"
