"""
Run configuration: defaults, config files and command-line overrides
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

from .cutopt import OptimizerConfig
from .errors import ConfigError
from .formats import read_json
from .simplex import DEFAULT_FRAC_TOL
from .types import InitMethod, Variant

DEFAULT_CONFIG: Dict[str, Any] = {
    "widths": [32],
    "init": "gmi",
    "variant": "gmi",
    "alpha": 1e-3,
    "beta": 1e-4,
    "max_inner": 1000,
    "max_outer": 100000,
    "max_steps": 2000,
    "conv_tol": 1e-6,
    "conv_window": 50,
    "seed": 0,
    "node_limit": 10000,
    "jobs": 1,
    "frac_tol": DEFAULT_FRAC_TOL,
    "timing": False,
}

_INT_KEYS = {"max_inner", "max_outer", "max_steps", "conv_window", "seed", "node_limit", "jobs"}
_FLOAT_KEYS = {"alpha", "beta", "conv_tol", "frac_tol"}


def parse_widths(text: str) -> List[Optional[int]]:
    """
    Parse a comma list such as "32,32". The entry "all" keeps every GMI
    candidate in that round.
    """
    widths: List[Optional[int]] = []
    for part in text.split(","):
        part = part.strip()
        if part == "all":
            widths.append(None)
            continue
        try:
            width = int(part)
        except ValueError as e:
            raise ConfigError(f"Invalid width {part!r} in {text!r}") from e
        if width < 1:
            raise ConfigError(f"Widths must be positive, got {width}")
        widths.append(width)
    return widths


def _check_value(key: str, value: Any) -> Any:
    if key in _INT_KEYS:
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"'{key}' must be an integer, got {value!r}")
    elif key in _FLOAT_KEYS:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"'{key}' must be a number, got {value!r}")
        value = float(value)
    elif key == "timing":
        if not isinstance(value, bool):
            raise ConfigError(f"'timing' must be true or false, got {value!r}")
    elif key == "widths":
        if isinstance(value, str):
            return parse_widths(value)
        if not isinstance(value, list) or not value:
            raise ConfigError("'widths' must be a nonempty list")
        for width in value:
            if width is not None and (not isinstance(width, int) or width < 1):
                raise ConfigError(f"Invalid width {width!r}")
    elif key == "init":
        try:
            InitMethod(value)
        except ValueError as e:
            raise ConfigError(f"'init' must be gmi or random, got {value!r}") from e
    elif key == "variant":
        try:
            Variant(value)
        except ValueError as e:
            raise ConfigError(f"'variant' must be gmi or log, got {value!r}") from e
    return value


def load_config_file(path: Path) -> Dict[str, Any]:
    """Read a JSON config file; every key must name a known setting"""
    data = read_json(Path(path))
    unknown = sorted(set(data) - set(DEFAULT_CONFIG))
    if unknown:
        raise ConfigError(f"Unknown config key(s) in {path}: {', '.join(unknown)}")
    return {key: _check_value(key, value) for key, value in data.items()}


def merge_config(
    file_config: Optional[Mapping[str, Any]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> Dict[str, Any]:
    """Defaults, then the config file, then explicit command-line values"""
    config = dict(DEFAULT_CONFIG)
    for layer in (file_config, overrides):
        for key, value in (layer or {}).items():
            if key not in DEFAULT_CONFIG:
                raise ConfigError(f"Unknown setting '{key}'")
            config[key] = _check_value(key, value)
    return config


def optimizer_config(config: Mapping[str, Any]) -> OptimizerConfig:
    try:
        return OptimizerConfig(
            alpha=config["alpha"],
            beta=config["beta"],
            max_outer=config["max_outer"],
            max_inner=config["max_inner"],
            max_total_steps=config["max_steps"],
            conv_tol=config["conv_tol"],
            conv_window=config["conv_window"],
            seed=config["seed"],
            timing=config["timing"],
        )
    except ValueError as e:
        raise ConfigError(str(e)) from e


@dataclass(frozen=True)
class RunSpec:
    """Everything one optimize run needs, picklable for worker processes"""

    instance: Path
    widths: List[Optional[int]]
    init: InitMethod
    variant: Variant
    optimizer: OptimizerConfig
    frac_tol: float = DEFAULT_FRAC_TOL
    trace: Optional[Path] = None
    out: Optional[Path] = None

    @classmethod
    def from_config(
        cls,
        config: Mapping[str, Any],
        instance: Path,
        trace: Optional[Path] = None,
        out: Optional[Path] = None,
    ) -> "RunSpec":
        widths = list(config["widths"])
        init = InitMethod(config["init"])
        if init == InitMethod.RANDOM and None in widths:
            raise ConfigError("Width 'all' needs init=gmi")
        return cls(
            instance=Path(instance),
            widths=widths,
            init=init,
            variant=Variant(config["variant"]),
            optimizer=optimizer_config(config),
            frac_tol=config["frac_tol"],
            trace=trace,
            out=out,
        )
