"""
Seeded Monte-Carlo sweeps of the processing accuracy against the error sources.

The following scenarios are available:

=========   ==============================   =====================================
Scenario    Swept parameter                  Series
=========   ==============================   =====================================
FIG3A       tap number M                     none (limited tap number only)
FIG4        OSNR (dB)                        noise floor shape (FLAT, SINC)
FIG5        chirp parameter alpha            none (SOD fade on)
FIG6        D2 at fixed tap delay            SOD fade off / on
FIG7        D3                               none
FIG8        RTCE range                       none
FIG9        accumulated error sources        none
FIG10       processor preset 1, 2, 3         error budget off / on
FIG12B      processor preset 1               theoretical / before / after calibration
CUSTOM      any spec field                   none
=========   ==============================   =====================================
"""

import enum
import logging
from dataclasses import dataclass, field, replace
from multiprocessing import Pool
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from . import ConfigurationError
from .calibration import CalibrationConfig, calibrate
from .engine import ProcessorSpec, alignment_delay, delay_span, perturbed_taps, preset, synthesize
from .impairments import ErrorBudget, FloorShape, power_fade_curve
from .signals import DIF, HT, INT, FunctionKind, Grid, TargetFunction, normalize_and_align, reference_output, rmse
from .taps import PS, LinkGeometry

logger = logging.getLogger(__name__)

# frequency at which the SOD power fade is reported
FADE_FREQUENCY = 5e9

DEFAULT_SEEDS = tuple(range(20))
DEFAULT_FUNCTIONS = (DIF, INT, HT)

GEOMETRY_FIELDS = ("delta_lambda", "length_L", "d2", "d3", "lambda0", "tap_delay")
BUDGET_FIELDS = (
    "osnr_db",
    "floor_shape",
    "alpha",
    "tod_enabled",
    "rtce_range",
    "delay_jitter",
    "sod_fade_enabled",
    "tod_center_referenced",
    "comb_noise_static",
)
SWEEPABLE = ("M",) + GEOMETRY_FIELDS + BUDGET_FIELDS + ("stage", "processor", "budget", "calibration")

# CSV column of a series, when it differs from the parameter name
_COLUMN_NAMES = {"floor_shape": "floor"}

# error sources added one by one: fluctuating comb noise, chirp, SOD fade, TOD, RTCE
_ACCUMULATED_SOURCES = (
    {"osnr_db": 30.0, "comb_noise_static": False},
    {"alpha": 0.5},
    {"sod_fade_enabled": True},
    {"tod_enabled": True},
    {"rtce_range": 0.05},
)
ACCUMULATION_STAGES = tuple(
    {key: value for source in _ACCUMULATED_SOURCES[:stage] for key, value in source.items()}
    for stage in range(len(_ACCUMULATED_SOURCES) + 1)
)
ACCUMULATION_D3 = 0.083


class Scenario(enum.Enum):
    FIG3A = "FIG3A"
    FIG4 = "FIG4"
    FIG5 = "FIG5"
    FIG6 = "FIG6"
    FIG7 = "FIG7"
    FIG8 = "FIG8"
    FIG9 = "FIG9"
    FIG10 = "FIG10"
    FIG12B = "FIG12B"
    CUSTOM = "CUSTOM"

    @classmethod
    def parse(cls, value) -> "Scenario":
        if isinstance(value, cls):
            return value
        try:
            return cls[str(value).strip().upper()]
        except KeyError:
            raise ConfigurationError(f"Unknown scenario '{value}'. Valid: {[s.name for s in cls]}") from None


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, enum.Enum):
        return value.name
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class SweepConfig:
    """A sweep of one parameter, for several functions and seeds.

    Parameters
    ----------
    scenario : Scenario
    base : ProcessorSpec
        Spec of every sweep point before the parameter (and series) is applied.
    parameter : str
        Name of the swept field: ``M``, a geometry or budget field, or one of the
        scenario-specific ``stage``, ``processor``.
    values : sequence
        Sorted, non-empty values of the parameter.
    functions : sequence of TargetFunction
        Subset of DIF, INT, HT.
    seeds : sequence of int
    series : str, optional
        Secondary parameter, one curve per value.
    series_values : sequence
    output : str, optional
        CSV path written by the command-line interface.
    grid : Grid
    calibration : CalibrationConfig
        Used by the ``calibration`` series.
    workers : int
        Worker processes; 1 runs in-process.
    """

    scenario: Scenario
    base: ProcessorSpec
    parameter: str
    values: Tuple
    functions: Tuple[TargetFunction, ...] = DEFAULT_FUNCTIONS
    seeds: Tuple[int, ...] = DEFAULT_SEEDS
    series: Optional[str] = None
    series_values: Tuple = ()
    output: Optional[str] = None
    grid: Grid = field(default_factory=Grid)
    calibration: CalibrationConfig = field(default_factory=CalibrationConfig)
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario.parse(self.scenario))
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "series_values", tuple(self.series_values))
        object.__setattr__(self, "functions", tuple(TargetFunction.from_name(f) for f in self.functions))
        if self.parameter not in SWEEPABLE:
            raise ConfigurationError(f"sweep.parameter '{self.parameter}' is not a field of the spec")
        if not self.values:
            raise ConfigurationError("sweep.values must not be empty")
        if list(self.values) != sorted(self.values):
            raise ConfigurationError(f"sweep.values must be sorted, got {list(self.values)}")
        if not self.seeds:
            raise ConfigurationError("sweep.seeds must contain at least one seed")
        if not self.functions:
            raise ConfigurationError("sweep.functions must not be empty")
        for function in self.functions:
            if function.kind is FunctionKind.PHASE_ENCODE:
                raise ConfigurationError("sweep.functions: PHASE_ENCODE has no ideal output to compare against")
        if self.series is not None:
            if self.series not in SWEEPABLE:
                raise ConfigurationError(f"sweep.series '{self.series}' is not a field of the spec")
            if not self.series_values:
                raise ConfigurationError("sweep.series_values must not be empty when a series is given")
        elif self.series_values:
            raise ConfigurationError("sweep.series_values given without sweep.series")
        if int(self.workers) != self.workers or self.workers < 1:
            raise ConfigurationError(f"sweep.workers must be a positive integer, got {self.workers}")

    @property
    def series_column(self) -> Optional[str]:
        if self.series is None:
            return None
        return _COLUMN_NAMES.get(self.series, self.series)

    def points(self):
        """(function, series value, parameter value, seed) in the deterministic output order."""
        series_values = self.series_values or (None,)
        for function in self.functions:
            for series_value in series_values:
                for value in self.values:
                    for seed in self.seeds:
                        yield function, series_value, value, seed


class SweepRow(NamedTuple):
    function: str
    value: object
    series: object
    seed: int
    rmse: float


@dataclass
class SweepResult:
    """Rows of one sweep, one per (function, series value, parameter value, seed)."""

    parameter: str
    rows: List[SweepRow]
    series: Optional[str] = None
    series_column: Optional[str] = None

    def header(self) -> List[str]:
        columns = ["function", self.parameter]
        if self.series is not None:
            columns.append(self.series_column or self.series)
        return columns + ["seed", "rmse"]

    def to_csv_rows(self) -> List[List[str]]:
        rows = [self.header()]
        for row in self.rows:
            line = [row.function, _format_value(row.value)]
            if self.series is not None:
                line.append(_format_value(row.series))
            rows.append(line + [str(row.seed), repr(float(row.rmse))])
        return rows

    def select(self, function, value=None, series=None) -> List[float]:
        name = TargetFunction.from_name(function).name
        return [
            r.rmse
            for r in self.rows
            if r.function == name and (value is None or r.value == value) and (series is None or r.series == series)
        ]

    def aggregates(self) -> Dict[Tuple[str, object, object], Dict[str, float]]:
        """Median, min and max rmse per (function, series value, parameter value)."""
        groups = {}
        for row in self.rows:
            groups.setdefault((row.function, row.series, row.value), []).append(row.rmse)
        return {
            key: {"median": float(np.median(values)), "min": min(values), "max": max(values)}
            for key, values in groups.items()
        }

    def median(self, function, value, series=None) -> float:
        return self.aggregates()[(TargetFunction.from_name(function).name, series, value)]["median"]

    def medians(self, function, series=None) -> List[float]:
        """Medians in sweep order for one function (and series)."""
        name = TargetFunction.from_name(function).name
        values = []
        for row in self.rows:
            if row.function == name and row.series == series and row.value not in values:
                values.append(row.value)
        aggregates = self.aggregates()
        return [aggregates[(name, series, value)]["median"] for value in values]

    def to_dataframe(self):
        """Rows as a pandas DataFrame (needs the ``dataframe`` extra)."""
        try:
            import pandas as pd
        except ImportError:
            print("Please install the following package: pandas")
            return
        header = self.header()
        records = []
        for row in self.rows:
            record = [row.function, row.value]
            if self.series is not None:
                record.append(_format_value(row.series))
            records.append(record + [row.seed, row.rmse])
        return pd.DataFrame(records, columns=header)


def accumulation_stage(spec: ProcessorSpec, stage: int) -> ProcessorSpec:
    """Spec with the first `stage` error sources of the accumulation study enabled."""
    if not 0 <= stage < len(ACCUMULATION_STAGES):
        raise ConfigurationError(f"stage must lie in [0, {len(ACCUMULATION_STAGES) - 1}], got {stage}")
    budget = replace(ErrorBudget.zero(spec.budget.seed), **ACCUMULATION_STAGES[stage])
    geometry = replace(spec.geometry, d3=ACCUMULATION_D3)
    return replace(spec, geometry=geometry, budget=budget)


def apply_parameter(spec: ProcessorSpec, name: str, value) -> ProcessorSpec:
    """Set one sweepable field of a spec."""
    if name == "M":
        return replace(spec, M=int(value))
    if name in GEOMETRY_FIELDS:
        return replace(spec, geometry=replace(spec.geometry, **{name: value}))
    if name in BUDGET_FIELDS:
        return spec.with_budget(**{name: value})
    if name == "stage":
        return accumulation_stage(spec, int(value))
    if name == "processor":
        return preset(f"PROCESSOR_{int(value)}", function=spec.function, seed=spec.budget.seed)
    if name == "budget":
        if value not in ("off", "on"):
            raise ConfigurationError(f"budget must be 'off' or 'on', got {value!r}")
        return spec.without_errors() if value == "off" else spec
    if name == "calibration":
        return spec
    raise ConfigurationError(f"'{name}' is not a sweepable field")


def evaluate_rmse(spec: ProcessorSpec, grid: Optional[Grid] = None, draw: Optional[int] = None) -> float:
    """RMSE between the processor output for the Gaussian test pulse and the ideal output.

    The output is advanced by the bulk delay, both waveforms are scaled to unit peak and the
    comparison is restricted to the grid's observation window around the pulse.

    Fast-varying comb noise is scored over the pair of mirror realizations +eps and -eps
    of the draw: the result is the root of the mean squared error of the two.
    """
    grid = grid or Grid().fitted(*delay_span(spec))
    pulse = grid.pulse()
    ideal = reference_output(spec.function, grid)
    fast_noise = not spec.budget.comb_noise_static and np.isfinite(spec.budget.osnr_db)
    errors = []
    for antithetic in (False, True) if fast_noise else (False,):
        realized = perturbed_taps(spec, draw=draw, antithetic=antithetic)
        output = synthesize(pulse, realized, spec.geometry, spec.budget)
        actual, reference = normalize_and_align(output, ideal, alignment_delay(spec, realized))
        errors.append(rmse(grid.observe(reference), grid.observe(actual)))
    if len(errors) == 1:
        return errors[0]
    return float(np.sqrt(np.mean(np.square(errors))))


def calibration_rmse(spec: ProcessorSpec, cfg: Optional[CalibrationConfig] = None, grid: Optional[Grid] = None):
    """Calibrate the spec against its own design and report the RMSE before, after and without errors."""
    grid = grid or Grid().fitted(*delay_span(spec))
    corrected, report = calibrate(spec, spec.design(), cfg)
    return corrected, report.with_rmse(
        before=evaluate_rmse(spec, grid),
        after=evaluate_rmse(corrected, grid),
        theoretical=evaluate_rmse(spec.without_errors(), grid),
    )


def _point_spec(cfg: SweepConfig, function, series_value, value, seed) -> ProcessorSpec:
    spec = replace(cfg.base, function=function, budget=replace(cfg.base.budget, seed=seed))
    spec = apply_parameter(spec, cfg.parameter, value)
    if cfg.series is not None:
        spec = apply_parameter(spec, cfg.series, series_value)
    return spec


def _evaluate_job(job) -> float:
    spec, grid, mode, calibration = job
    if mode == "theoretical":
        return evaluate_rmse(spec.without_errors(), grid)
    if mode == "after":
        corrected, _ = calibrate(spec, spec.design(), calibration)
        return evaluate_rmse(corrected, grid)
    return evaluate_rmse(spec, grid)


def run_sweep(cfg: SweepConfig) -> SweepResult:
    """Evaluate every (function, series value, parameter value, seed) point of a sweep.

    One grid, large enough for the longest delay of any point, is shared by the whole sweep.
    Rows come out in the order of :meth:`SweepConfig.points` whatever the number of workers.
    """
    points = list(cfg.points())
    specs = [_point_spec(cfg, *point) for point in points]
    spans = [delay_span(spec) for spec in specs]
    grid = cfg.grid.fitted(min(s[0] for s in spans), max(s[1] for s in spans))
    modes = [point[1] if cfg.series == "calibration" else None for point in points]
    jobs = [(spec, grid, mode, cfg.calibration) for spec, mode in zip(specs, modes)]
    logger.info("Running %s: %d points on a %d-sample grid", cfg.scenario.name, len(jobs), grid.count)

    if cfg.workers > 1:
        with Pool(cfg.workers) as p:
            values = p.map(_evaluate_job, jobs)
    else:
        values = []
        for job, (function, series_value, value, _) in zip(jobs, points):
            values.append(_evaluate_job(job))
            logger.debug("%s %s=%s %s", function.name, cfg.parameter, value, series_value)

    rows = [
        SweepRow(function.name, value, series_value, seed, float(result))
        for (function, series_value, value, seed), result in zip(points, values)
    ]
    return SweepResult(cfg.parameter, rows, cfg.series, cfg.series_column)


def fade_rows(cfg: SweepConfig, frequency: float = FADE_FREQUENCY) -> List[List[str]]:
    """The ``d2,fade_db`` companion table of a D2 sweep."""
    if cfg.parameter != "d2":
        raise ConfigurationError("The fade table needs a sweep over d2")
    fades = power_fade_curve(frequency, cfg.values, cfg.base.geometry)
    return [["d2", "fade_db"]] + [[_format_value(d2), repr(float(db))] for d2, db in zip(cfg.values, fades)]


def scenario(
    id,
    seeds: Sequence[int] = DEFAULT_SEEDS,
    functions: Sequence = DEFAULT_FUNCTIONS,
    base: Optional[ProcessorSpec] = None,
    **overrides,
) -> SweepConfig:
    """Sweep configuration of a predefined scenario.

    Parameters
    ----------
    id : Scenario or str
    seeds : sequence of int
    functions : sequence
    base : ProcessorSpec, optional
        Base spec of a CUSTOM scenario.
    **overrides
        Other :class:`SweepConfig` fields (``output``, ``grid``, ``workers`` ...); for CUSTOM,
        ``parameter`` and ``values`` are required.

    Examples
    --------
    >>> cfg = scenario("fig4", seeds=range(5))
    >>> cfg.parameter, cfg.series
    ('osnr_db', 'floor_shape')
    """
    id = Scenario.parse(id)
    zero = ProcessorSpec(M=80, budget=ErrorBudget.zero())
    faded = ProcessorSpec(M=80, budget=ErrorBudget())
    definitions = {
        Scenario.FIG3A: dict(base=zero, parameter="M", values=(20, 40, 80)),
        Scenario.FIG4: dict(
            base=zero.with_budget(comb_noise_static=False),
            parameter="osnr_db",
            values=(10.0, 15.0, 20.0, 25.0, 30.0, 40.0),
            series="floor_shape",
            series_values=(FloorShape.FLAT, FloorShape.SINC),
        ),
        Scenario.FIG5: dict(base=faded, parameter="alpha", values=(0.0, 0.25, 0.5, 0.75, 1.0)),
        Scenario.FIG6: dict(
            base=replace(zero, geometry=LinkGeometry(tap_delay=LinkGeometry().delta_t / PS)),
            parameter="d2",
            values=(5.0, 10.0, 15.0, 20.0, 25.0, 30.0),
            series="sod_fade_enabled",
            series_values=(False, True),
        ),
        Scenario.FIG7: dict(
            base=zero.with_budget(tod_enabled=True), parameter="d3", values=(0.0, 0.1, 0.25, 0.5)
        ),
        Scenario.FIG8: dict(base=zero, parameter="rtce_range", values=(0.0, 0.02, 0.05, 0.1)),
        Scenario.FIG9: dict(base=zero, parameter="stage", values=tuple(range(len(ACCUMULATION_STAGES)))),
        Scenario.FIG10: dict(
            base=zero, parameter="processor", values=(1, 2, 3), series="budget", series_values=("off", "on")
        ),
        Scenario.FIG12B: dict(
            base=zero,
            parameter="processor",
            values=(1,),
            series="calibration",
            series_values=("theoretical", "before", "after"),
            calibration=CalibrationConfig(phase_correction=True),
        ),
    }
    if id is Scenario.CUSTOM:
        if "parameter" not in overrides or "values" not in overrides:
            raise ConfigurationError("A CUSTOM sweep needs 'parameter' and 'values'")
        definition = dict(base=base or faded)
    else:
        definition = definitions[id]
        if base is not None:
            definition["base"] = base
    definition.update(overrides)
    return SweepConfig(scenario=id, seeds=tuple(seeds), functions=tuple(functions), **definition)


def run_fig10(
    seeds: Sequence[int] = DEFAULT_SEEDS, functions: Sequence = DEFAULT_FUNCTIONS, **overrides
) -> SweepResult:
    """The three processor presets, with the limited tap number only and with their full error budget."""
    return run_sweep(scenario(Scenario.FIG10, seeds=seeds, functions=functions, **overrides))
