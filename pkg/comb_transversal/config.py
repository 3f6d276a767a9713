"""
JSON run configuration: a processor spec plus the optional sweep, calibration and grid sections.

Keys mirror the dataclass field names exactly, e.g.::

    {
        "M": 80,
        "function": "DIF",
        "geometry": {"delta_lambda": 0.4, "length_L": 4.8, "d2": 17.4, "d3": 0.083, "lambda0": 1550.0},
        "budget": {"osnr_db": "inf", "floor_shape": "FLAT", "alpha": 0, "seed": 0},
        "sweep": {"scenario": "CUSTOM", "parameter": "alpha", "values": [0, 0.5, 1]},
        "calibration": {"damping": 0.5, "max_iter": 20, "tol": 0.001, "phase_correction": false},
        "grid": {"dt": 1e-12, "count": 8192, "fwhm": 1.7e-10}
    }

Unknown keys are rejected, naming the key.
"""

import copy
import dataclasses
import enum
import json
import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional

from . import ConfigurationError, ProcessorError
from .calibration import CalibrationConfig
from .engine import ProcessorSpec
from .experiments import SweepConfig, scenario
from .impairments import ErrorBudget
from .signals import Grid, TargetFunction
from .taps import LinkGeometry

logger = logging.getLogger(__name__)

TOP_LEVEL_KEYS = ("M", "function", "geometry", "budget", "sweep", "calibration", "grid")
SWEEP_KEYS = ("scenario", "parameter", "values", "functions", "seeds", "series", "series_values", "output", "workers")


@dataclass
class RunConfig:
    """Everything a command-line run needs."""

    spec: ProcessorSpec = field(default_factory=ProcessorSpec)
    sweep: Optional[dict] = None
    calibration: Optional[CalibrationConfig] = None
    grid: Grid = field(default_factory=Grid)
    spec_given: bool = False

    def sweep_config(self, scenario_id=None, seeds=None, output=None) -> SweepConfig:
        """Sweep of the named scenario, or of the config's ``sweep`` section; explicit arguments win."""
        options = dict(self.sweep or {})
        scenario_id = scenario_id or options.pop("scenario", None) or "CUSTOM"
        options.pop("scenario", None)
        if seeds is not None:
            options["seeds"] = seeds
        if output is not None:
            options["output"] = output
        options.setdefault("grid", self.grid)
        if self.calibration is not None:
            options.setdefault("calibration", self.calibration)
        if self.spec_given:
            options["base"] = self.spec
        return scenario(scenario_id, **options)


def _check_keys(section: str, data: dict, allowed: Iterable[str]):
    if not isinstance(data, dict):
        raise ConfigurationError(f"{section} must be a JSON object, got {type(data).__name__}")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        prefix = f"{section}." if section else ""
        raise ConfigurationError(f"Unknown configuration key '{prefix}{unknown[0]}'")


def _field_names(cls):
    return [f.name for f in dataclasses.fields(cls)]


def _build(cls, section: str, data: dict):
    _check_keys(section, data, _field_names(cls))
    try:
        return cls(**data)
    except ProcessorError:
        raise
    except (TypeError, ValueError) as err:
        raise ConfigurationError(f"{section}: {err}") from err


def _parse_osnr(value):
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "infinity", "+inf"):
            return float("inf")
        raise ConfigurationError(f"budget.osnr_db must be a number or 'inf', got '{value}'")
    return value


def parse_spec(data: dict) -> ProcessorSpec:
    """ProcessorSpec from the spec keys of a configuration mapping."""
    geometry = _build(LinkGeometry, "geometry", data.get("geometry", {}))
    budget_data = dict(data.get("budget", {}))
    if "osnr_db" in budget_data:
        budget_data["osnr_db"] = _parse_osnr(budget_data["osnr_db"])
    budget = _build(ErrorBudget, "budget", budget_data)
    try:
        function = TargetFunction.from_name(data.get("function", "DIF"))
    except ValueError as err:
        raise ConfigurationError(f"function: {err}") from err
    return ProcessorSpec(M=data.get("M", 80), geometry=geometry, function=function, budget=budget)


def parse_config(data: dict) -> RunConfig:
    """Validate a configuration mapping."""
    _check_keys("", data, TOP_LEVEL_KEYS)
    sweep = data.get("sweep")
    if sweep is not None:
        _check_keys("sweep", sweep, SWEEP_KEYS)
    return RunConfig(
        spec=parse_spec(data),
        sweep=sweep,
        calibration=_build(CalibrationConfig, "calibration", data["calibration"]) if "calibration" in data else None,
        grid=_build(Grid, "grid", data.get("grid", {})),
        spec_given=any(key in data for key in ("M", "function", "geometry", "budget")),
    )


def _parse_value(text: str):
    try:
        return json.loads(text)
    except ValueError:
        return text


def apply_overrides(data: dict, overrides: Iterable[str]) -> dict:
    """Apply ``key.path=value`` overrides to a copy of a configuration mapping.

    Values are parsed as JSON, falling back to a plain string.

    Examples
    --------
    >>> apply_overrides({}, ["budget.alpha=0.5", "function=HT"])
    {'budget': {'alpha': 0.5}, 'function': 'HT'}
    """
    data = copy.deepcopy(data)
    for override in overrides:
        key, sep, text = override.partition("=")
        if not sep or not key:
            raise ConfigurationError(f"Override '{override}' is not of the form key=value")
        path = key.strip().split(".")
        target = data
        for part in path[:-1]:
            target = target.setdefault(part, {})
            if not isinstance(target, dict):
                raise ConfigurationError(f"Override '{key}': '{part}' is not a section")
        target[path[-1]] = _parse_value(text.strip())
        logger.debug("Override %s = %r", key, target[path[-1]])
    return data


def _jsonable(value):
    if isinstance(value, float) and value == float("inf"):
        return "inf"
    if isinstance(value, enum.Enum):
        return value.name
    return value


def spec_to_dict(spec: ProcessorSpec) -> dict:
    """Configuration mapping of a spec, the inverse of :func:`parse_spec`."""
    return {
        "M": spec.M,
        "function": spec.function.to_json(),
        "geometry": {k: v for k, v in dataclasses.asdict(spec.geometry).items() if v is not None},
        "budget": {f: _jsonable(getattr(spec.budget, f)) for f in _field_names(ErrorBudget)},
    }
