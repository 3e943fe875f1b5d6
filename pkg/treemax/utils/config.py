"""Run configuration for checkers and experiments."""

from dataclasses import dataclass, field, fields
from typing import Any, Callable, Dict, List, Optional

from treemax.core.conditions import ConditionParams
from treemax.core.errors import ConfigError
from treemax.core.weights import LevelWeight, parse_weight

MODES = ("report", "assert")
FORMATS = ("csv", "json")
GEOMETRIES = ("sphere", "ball")


def _parse_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"Not a boolean: {value!r}")


def _parse_int_list(value: Any) -> List[int]:
    if isinstance(value, str):
        return [int(v) for v in value.split(",") if v.strip()]
    return [int(v) for v in value]


@dataclass
class RunConfig:
    """Configuration of one treemax run."""

    # Tree and exponents
    k: int = 2
    p: float = 2.0
    q: Optional[float] = None
    delta: Optional[float] = None
    s: Optional[float] = None
    beta: Optional[float] = None
    alpha: Optional[float] = None
    weight: Optional[str] = None

    # Grids; None picks the command's own default
    j_max: Optional[int] = None
    r_max: Optional[int] = None
    depth: Optional[int] = None
    truncation_depth: Optional[int] = None
    centers: Optional[int] = None
    radii: Optional[int] = None
    level_horizon: Optional[int] = None
    windows: Optional[List[int]] = None
    geometry: str = "sphere"
    budget: Optional[int] = None
    seed: int = 0

    # Point queries
    j: Optional[int] = None
    r: Optional[int] = None
    wE: Optional[float] = None
    wF: Optional[float] = None

    # Output and mode
    out: Optional[str] = None
    format: str = "csv"
    mode: str = "report"
    constant: Optional[float] = None
    linear: bool = False
    verbose: bool = False

    # Extra settings
    extra: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, config_dict: Dict[str, Any]) -> 'RunConfig':
        """Create a config from a dictionary, coercing string values.

        Args:
            config_dict: Dictionary containing configuration values.

        Returns:
            A RunConfig object; unrecognized keys land in `extra`.

        Raises:
            ConfigError: If a value cannot be converted to its field's type.
        """
        recognized = {f.name for f in fields(cls)} - {"extra"}
        extra = {k: v for k, v in config_dict.items() if k not in recognized}
        clean = {}
        for key, value in config_dict.items():
            if key not in recognized:
                continue
            converter = _CONVERTERS.get(key)
            try:
                clean[key] = converter(value) if converter and value is not None else value
            except (TypeError, ValueError) as e:
                raise ConfigError(f"Bad value for {key}: {value!r} ({e})")
        config = cls(**clean)
        config.extra = extra
        return config

    def to_dict(self) -> Dict[str, Any]:
        """Convert the config to a dictionary.

        Returns:
            Dictionary representation of the config, extras merged in.
        """
        result = {}
        for f in fields(self):
            if f.name != 'extra':
                value = getattr(self, f.name)
                result[f.name] = list(value) if isinstance(value, (list, tuple)) else value
        result.update(self.extra)
        return result

    def __getitem__(self, key: str) -> Any:
        """Get a config value.

        Raises:
            KeyError: If the key is not in the config.
        """
        if hasattr(self, key):
            return getattr(self, key)
        elif key in self.extra:
            return self.extra[key]
        else:
            raise KeyError(f"Config has no key '{key}'")

    def __setitem__(self, key: str, value: Any) -> None:
        if hasattr(self, key):
            setattr(self, key, value)
        else:
            self.extra[key] = value

    def params(self) -> ConditionParams:
        """The exponents as ConditionParams; raises AdmissibilityError when inadmissible."""
        return ConditionParams(
            p=self.p, q=self.q, beta=self.beta, alpha=self.alpha, delta=self.delta, s=self.s
        )

    def level_weight(self) -> LevelWeight:
        if self.weight is None:
            raise ConfigError("A weight descriptor is required (--weight power:a=<a> or table:[...])")
        return parse_weight(self.weight)

    def validate(self) -> 'RunConfig':
        """Check value ranges and admissibility.

        Raises:
            ConfigError: On malformed settings.
            AdmissibilityError: On an inadmissible exponent tuple.
        """
        if not isinstance(self.k, int) or self.k < 2:
            raise ConfigError(f"k must be an integer >= 2, got {self.k}")
        if self.mode not in MODES:
            raise ConfigError(f"Unknown mode {self.mode!r}; expected one of {MODES}")
        if self.format not in FORMATS:
            raise ConfigError(f"Unknown format {self.format!r}; expected one of {FORMATS}")
        if self.geometry not in GEOMETRIES:
            raise ConfigError(f"Unknown geometry {self.geometry!r}; expected one of {GEOMETRIES}")
        if self.mode == "assert" and self.constant is None:
            raise ConfigError("Assert mode needs a constant (--constant)")
        if self.constant is not None and not self.constant > 0:
            raise ConfigError(f"The asserted constant must be positive, got {self.constant}")
        for name in ("j_max", "r_max", "depth", "truncation_depth", "centers", "radii", "level_horizon", "j", "r"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ConfigError(f"{name} must be nonnegative, got {value}")
        if self.budget is not None and self.budget <= 0:
            raise ConfigError(f"budget must be positive, got {self.budget}")
        if self.weight is not None:
            parse_weight(self.weight)
        self.params()
        return self


_CONVERTERS: Dict[str, Callable[[Any], Any]] = {
    "k": int,
    "p": float,
    "q": float,
    "delta": float,
    "s": float,
    "beta": float,
    "alpha": float,
    "weight": str,
    "j_max": int,
    "r_max": int,
    "depth": int,
    "truncation_depth": int,
    "centers": int,
    "radii": int,
    "level_horizon": int,
    "windows": _parse_int_list,
    "geometry": str,
    "budget": int,
    "seed": int,
    "j": int,
    "r": int,
    "wE": float,
    "wF": float,
    "out": str,
    "format": str,
    "mode": str,
    "constant": float,
    "linear": _parse_bool,
    "verbose": _parse_bool,
}
