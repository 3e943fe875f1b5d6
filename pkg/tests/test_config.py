"""Tests for the run configuration."""

from fractions import Fraction

import pytest

from treemax.core.errors import AdmissibilityError, ConfigError
from treemax.core.weights import PowerWeight
from treemax.utils.config import RunConfig


def test_defaults():
    config = RunConfig()
    assert config.k == 2
    assert config.p == 2.0
    assert config.mode == "report"
    assert config.format == "csv"
    assert config.j_max is None
    assert config.validate() is config


def test_from_dict_coerces_strings():
    config = RunConfig.from_dict({
        "k": "3",
        "p": "1.5",
        "delta": "-0.5",
        "windows": "25, 50",
        "linear": "yes",
        "weight": "power:a=1/2",
        "colour": "blue",
    })
    assert config.k == 3
    assert config.p == 1.5
    assert config.delta == -0.5
    assert config.windows == [25, 50]
    assert config.linear is True
    assert config.extra == {"colour": "blue"}
    assert config["colour"] == "blue"
    assert config.level_weight() == PowerWeight(Fraction(1, 2))


def test_bad_values():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"k": "two"})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"verbose": "maybe"})


def test_get_and_set_items():
    config = RunConfig()
    config["seed"] = 4
    config["note"] = "x"
    assert config.seed == 4
    assert config.extra["note"] == "x"
    with pytest.raises(KeyError):
        config["absent"]


def test_to_dict_merges_extras():
    config = RunConfig.from_dict({"windows": [10, 20], "tag": 1})
    data = config.to_dict()
    assert data["windows"] == [10, 20]
    assert data["tag"] == 1
    assert "extra" not in data


@pytest.mark.parametrize(
    "settings",
    [
        {"k": 1},
        {"mode": "strict"},
        {"format": "xml"},
        {"geometry": "cube"},
        {"mode": "assert"},
        {"mode": "assert", "constant": -1.0},
        {"j_max": -1},
        {"budget": 0},
        {"weight": "gauss"},
    ],
)
def test_validate_rejects(settings):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(settings).validate()


def test_validate_checks_admissibility():
    with pytest.raises(AdmissibilityError):
        RunConfig.from_dict({"p": 1.0}).validate()
    with pytest.raises(AdmissibilityError):
        RunConfig.from_dict({"beta": 0.5, "alpha": 3.0}).validate()
    params = RunConfig.from_dict({"delta": 0.75, "s": 1.2}).validate().params()
    assert params.delta == 0.75
    assert params.s == 1.2


def test_level_weight_requires_descriptor():
    with pytest.raises(ConfigError):
        RunConfig().level_weight()
