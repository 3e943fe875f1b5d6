"""Tests for result tables."""

import json

import pytest

from treemax.core.conditions import ConditionParams, build_report
from treemax.experiments.tables import ResultTable, report_table


def _table():
    table = ResultTable("demo", 2, ["quantity", "parameter", "value_logk"], metadata={"p": 2.0})
    table.add_row("norm", "", 10.0)
    table.add_row("partial_sum", 25, 3.5)
    table.add_row("partial_sum", 50, 4.5)
    return table


def test_add_row_checks_length():
    with pytest.raises(ValueError):
        _table().add_row("norm", 1)


def test_select_and_value():
    table = _table()
    assert table.column("parameter") == ["", 25, 50]
    assert len(table.select(quantity="partial_sum")) == 2
    assert table.value("value_logk", quantity="partial_sum", parameter=50) == 4.5
    with pytest.raises(KeyError):
        table.value("value_logk", quantity="partial_sum")
    with pytest.raises(KeyError):
        table.value("value_logk", quantity="missing")


def test_linear_view_converts_log_columns():
    linear = _table().linear()
    assert linear.columns == ["quantity", "parameter", "value"]
    assert linear.value("value", quantity="norm") == 1024.0
    assert linear.value("value", parameter=25) == pytest.approx(2 ** 3.5)
    assert _table().columns[-1] == "value_logk"


def test_csv_and_json():
    table = _table()
    table.add_row("missing", None, "")
    lines = table.to_csv().splitlines()
    assert lines[0] == "quantity,parameter,value_logk"
    assert lines[1] == "norm,,10.0"
    assert lines[-1] == "missing,,"
    payload = json.loads(table.to_json())
    assert payload["experiment"] == "demo"
    assert payload["rows"][2] == ["partial_sum", 50, 4.5]
    assert payload["metadata"] == {"p": 2.0}


def test_report_table(binary):
    report = build_report("level:ms", binary, ConditionParams(s=2), {}, [0.0, 0.5, 0.25], {"j": 1})
    table = report_table(report)
    assert table.name == "level_ms"
    assert table.column("running_sup_logk") == [0.0, 0.5, 0.5]
    assert table.metadata["witness"] == {"j": 1}
