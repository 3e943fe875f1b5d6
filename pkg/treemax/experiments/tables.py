"""Result tables written by the experiments."""

import csv
import dataclasses
import io
import json
from typing import Any, Dict, List, Optional

from treemax.utils.numeric import k_pow

LOG_SUFFIX = "_logk"


def _linear_value(value: Any, k: int) -> Any:
    if value is None or value == "":
        return value
    return k_pow(float(value), k)


@dataclasses.dataclass
class ResultTable:
    """Rows of one experiment; magnitudes live in `*_logk` columns."""
    name: str
    k: int
    columns: List[str]
    rows: List[List[Any]] = dataclasses.field(default_factory=list)
    metadata: Dict[str, Any] = dataclasses.field(default_factory=dict)

    def add_row(self, *values: Any) -> None:
        if len(values) != len(self.columns):
            raise ValueError(
                f"Row of {len(values)} values for {len(self.columns)} columns in table {self.name}"
            )
        self.rows.append(list(values))

    def column(self, name: str) -> List[Any]:
        index = self.columns.index(name)
        return [row[index] for row in self.rows]

    def select(self, **criteria: Any) -> List[Dict[str, Any]]:
        """Rows (as dicts) whose columns equal every given value."""
        records = [dict(zip(self.columns, row)) for row in self.rows]
        return [r for r in records if all(r.get(key) == value for key, value in criteria.items())]

    def value(self, column: str, **criteria: Any) -> Any:
        """The single value of `column` in the row matching `criteria`.

        Raises:
            KeyError: If no row or more than one row matches.
        """
        matches = self.select(**criteria)
        if len(matches) != 1:
            raise KeyError(f"{len(matches)} rows of {self.name} match {criteria}")
        return matches[0][column]

    def linear(self) -> "ResultTable":
        """A copy with every `*_logk` column converted to k**value and renamed."""
        converted = [
            i for i, name in enumerate(self.columns) if name.endswith(LOG_SUFFIX)
        ]
        columns = [
            name[: -len(LOG_SUFFIX)] if i in converted else name
            for i, name in enumerate(self.columns)
        ]
        rows = [
            [_linear_value(v, self.k) if i in converted else v for i, v in enumerate(row)]
            for row in self.rows
        ]
        return ResultTable(self.name, self.k, columns, rows, dict(self.metadata))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "experiment": self.name,
            "columns": list(self.columns),
            "rows": [list(row) for row in self.rows],
            "metadata": dict(self.metadata),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=4, sort_keys=True)

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in row])
        return buffer.getvalue()


def report_table(report, name: Optional[str] = None) -> ResultTable:
    """CSV view of a ConditionReport: one row per grid index of the running sup."""
    table = ResultTable(
        name or report.condition.replace(":", "_"),
        report.k,
        ["index", "running_sup_logk"],
        metadata=report.to_dict(),
    )
    for index, value in enumerate(report.running_sup_logk):
        table.add_row(index, value)
    return table

