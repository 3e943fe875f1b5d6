"""I/O utilities: result files and flat key=value config files."""

import hashlib
import json
import os
import tempfile
from typing import Any, Dict, Optional

from treemax.core.conditions import ConditionReport
from treemax.core.errors import ConfigError
from treemax.experiments.tables import ResultTable, report_table
from treemax.utils.config import RunConfig
from treemax.utils.numeric import k_pow

# Settings that do not change the content of output files.
_UNHASHED = ("out", "verbose")


def run_hash(params: Dict[str, Any]) -> str:
    """First 12 hex digits of the SHA-256 of the canonical JSON of the run parameters."""
    canonical = json.dumps(params, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def output_stem(name: str, k: int, p: Optional[float], params: Dict[str, Any]) -> str:
    """`<name>_<k>_<p>_<hash>`, free of timestamps."""
    p_text = "na" if p is None else format(float(p), "g")
    return f"{name}_{k}_{p_text}_{run_hash(params)}"


def hashed_params(config: RunConfig) -> Dict[str, Any]:
    return {key: value for key, value in config.to_dict().items() if key not in _UNHASHED}


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.splitext(path)[1])
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def render_table(table: ResultTable, fmt: str = "csv", linear: bool = False) -> str:
    if linear:
        table = table.linear()
    if fmt == "csv":
        return table.to_csv()
    if fmt == "json":
        return table.to_json() + "\n"
    raise ConfigError(f"Unknown output format {fmt!r}")


def write_table(table: ResultTable, out_dir: str, stem: str, fmt: str = "csv", linear: bool = False) -> str:
    """Write a table as `<out_dir>/<stem>.<fmt>` and return the path."""
    path = os.path.join(out_dir, f"{stem}.{fmt}")
    _write_atomic(path, render_table(table, fmt, linear))
    return path


def report_payload(report: ConditionReport, linear: bool = False) -> Dict[str, Any]:
    """The JSON form of a report; log_k fields are converted when `linear`."""
    payload = report.to_dict()
    if linear:
        payload["empirical_sup"] = k_pow(payload.pop("empirical_sup_logk"), report.k)
        payload["running_sup"] = [k_pow(v, report.k) for v in payload.pop("running_sup_logk")]
    return payload


def render_report(report: ConditionReport, fmt: str = "json", linear: bool = False) -> str:
    if fmt == "json":
        return json.dumps(report_payload(report, linear), indent=4, sort_keys=True) + "\n"
    return render_table(report_table(report), "csv", linear)


def write_report(report: ConditionReport, out_dir: str, stem: str, fmt: str = "json", linear: bool = False) -> str:
    path = os.path.join(out_dir, f"{stem}.{fmt}")
    _write_atomic(path, render_report(report, fmt, linear))
    return path


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def read_config_dict(path: str) -> Dict[str, Any]:
    """Parse a flat `key = value` file; blank lines and `#` comments are skipped.

    Raises:
        ConfigError: On malformed lines or unknown keys.
    """
    known = set(RunConfig().to_dict())
    values: Dict[str, Any] = {}
    with open(path, "r", encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if "=" not in text:
                raise ConfigError(f"{path}:{number}: expected 'key = value', got {text!r}")
            key, value = (part.strip() for part in text.split("=", 1))
            if key not in known:
                raise ConfigError(f"{path}:{number}: unknown config key {key!r}")
            values[key] = value
    return values


def read_config(path: str) -> RunConfig:
    return RunConfig.from_dict(read_config_dict(path))


def write_config(config: RunConfig, path: str) -> None:
    """Write every set field of a config so that `read_config` restores it."""
    lines = [
        f"{key} = {_format_value(value)}"
        for key, value in config.to_dict().items()
        if value is not None and key not in config.extra
    ]
    _write_atomic(path, "\n".join(lines) + "\n")
