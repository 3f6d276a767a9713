"""
Synthesis of the processor output: weighted, delayed and per-channel filtered copies of the input.
"""

import enum
import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np
from scipy import fft as sp_fft

from . import ConfigurationError, SimulationError
from .impairments import ErrorBudget, apply_budget, channel_filter_bank, tod_extra_delay
from .signals import FunctionKind, TargetFunction, Waveform
from .taps import LinkGeometry, TapSet, design_taps

logger = logging.getLogger(__name__)

# samples below this fraction of the peak are outside the signal support
SUPPORT_THRESHOLD = 1e-12


@dataclass(frozen=True, eq=False)
class Corrections:
    """Spectral-shaper settings found by a calibration: a gain and a delay trim (seconds) per channel."""

    gains: np.ndarray
    delay_trims: np.ndarray

    def __post_init__(self):
        gains = np.array(self.gains, dtype=float).ravel()
        trims = np.array(self.delay_trims, dtype=float).ravel()
        if gains.size != trims.size:
            raise ConfigurationError(f"corrections: {gains.size} gains but {trims.size} delay trims")
        if not (np.all(np.isfinite(gains)) and np.all(np.isfinite(trims))):
            raise ConfigurationError("corrections: gains and delay trims must be finite")
        gains.setflags(write=False)
        trims.setflags(write=False)
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "delay_trims", trims)

    @classmethod
    def identity(cls, M: int) -> "Corrections":
        return cls(np.ones(M), np.zeros(M))

    @property
    def M(self) -> int:
        return self.gains.size


@dataclass(frozen=True)
class ProcessorSpec:
    """Physical parameters of a transversal processor and the errors it suffers.

    Parameters
    ----------
    M : int
        Tap number (comb lines used).
    geometry : LinkGeometry
    function : TargetFunction
    budget : ErrorBudget
    corrections : Corrections, optional
        Calibration layer applied on top of the programmed taps.
    """

    M: int = 80
    geometry: LinkGeometry = field(default_factory=LinkGeometry)
    function: TargetFunction = field(default_factory=lambda: TargetFunction(FunctionKind.DIF))
    budget: ErrorBudget = field(default_factory=ErrorBudget)
    corrections: Optional[Corrections] = None

    def __post_init__(self):
        try:
            valid = int(self.M) == self.M and self.M >= 2
        except (TypeError, ValueError, OverflowError):
            valid = False
        if not valid:
            raise ConfigurationError(f"M must be an integer of at least 2, got {self.M!r}")
        if not isinstance(self.function, TargetFunction):
            object.__setattr__(self, "function", TargetFunction.from_name(self.function))
        if self.function.kind is FunctionKind.PHASE_ENCODE and len(self.function.pattern) != self.M:
            raise ConfigurationError(
                f"function: PHASE_ENCODE pattern has {len(self.function.pattern)} entries but M = {self.M}"
            )
        if self.corrections is not None and self.corrections.M != self.M:
            raise ConfigurationError(f"corrections: {self.corrections.M} channels but M = {self.M}")

    def with_function(self, function: TargetFunction) -> "ProcessorSpec":
        return replace(self, function=function)

    def with_budget(self, **changes) -> "ProcessorSpec":
        return replace(self, budget=replace(self.budget, **changes))

    def with_corrections(self, corrections: Optional[Corrections]) -> "ProcessorSpec":
        return replace(self, corrections=corrections)

    def without_errors(self) -> "ProcessorSpec":
        """Same processor with a zero error budget (limited tap number only) and no corrections."""
        return replace(self, budget=ErrorBudget.zero(self.budget.seed), corrections=None)

    def design(self) -> TapSet:
        return design_taps(self.function, self.M, self.geometry)


class Preset(enum.Enum):
    PROCESSOR_1 = "PROCESSOR_1"
    PROCESSOR_2 = "PROCESSOR_2"
    PROCESSOR_3 = "PROCESSOR_3"


_PRESETS = {
    # discrete processor
    Preset.PROCESSOR_1: dict(M=80, osnr_db=20.0, alpha=0.1, delay_jitter=0.04, rtce_range=0.05),
    # integrated processors
    Preset.PROCESSOR_2: dict(M=8, osnr_db=20.0, alpha=0.8, delay_jitter=0.03, rtce_range=0.09),
    Preset.PROCESSOR_3: dict(M=20, osnr_db=20.0, alpha=0.8, delay_jitter=0.03, rtce_range=0.09),
}


def preset(id, function: Optional[TargetFunction] = None, seed: int = 0) -> ProcessorSpec:
    """Processor with the component parameters of a discrete (1) or integrated (2, 3) implementation.

    All three share the 0.4 nm comb spacing and the ~33.4 ps tap delay of the 4.8 km fibre link.

    Examples
    --------
    >>> spec = preset("PROCESSOR_2")
    >>> spec.M, spec.budget.rtce_range
    (8, 0.09)
    """
    if not isinstance(id, Preset):
        try:
            id = Preset[str(id).upper()]
        except KeyError:
            raise ConfigurationError(f"Unknown preset '{id}'. Valid: {[p.name for p in Preset]}") from None
    params = dict(_PRESETS[id])
    M = params.pop("M")
    return ProcessorSpec(
        M=M,
        geometry=LinkGeometry(),
        function=function or TargetFunction(FunctionKind.DIF),
        budget=ErrorBudget(seed=seed, **params),
    )


def perturbed_taps(
    spec: ProcessorSpec, taps: Optional[TapSet] = None, draw: Optional[int] = None, antithetic: bool = False
) -> TapSet:
    """Tap set actually realized by the hardware: programmed taps, calibration layer and error models."""
    taps = spec.design() if taps is None else taps
    gains = delay_trims = None
    if spec.corrections is not None:
        gains, delay_trims = spec.corrections.gains, spec.corrections.delay_trims
    return apply_budget(
        taps, spec.geometry, spec.budget, gains=gains, delay_trims=delay_trims, draw=draw, antithetic=antithetic
    )


def delay_span(spec: ProcessorSpec) -> Tuple[float, float]:
    """Bounds (earliest, latest) of the tap delays the spec can realize, in seconds."""
    geometry, budget = spec.geometry, spec.budget
    delta_t = geometry.delta_t
    jitter = budget.delay_jitter * delta_t
    tod = np.zeros(spec.M)
    if budget.tod_enabled:
        tod = tod_extra_delay(np.arange(spec.M), geometry, spec.M, budget.tod_center_referenced)
    trims = np.zeros(spec.M) if spec.corrections is None else spec.corrections.delay_trims
    extra_low = np.min(tod + trims) - jitter
    extra_high = np.max(tod + trims) + jitter
    return min(0.0, extra_low), (spec.M - 1) * delta_t + max(0.0, extra_high)


def alignment_delay(spec: ProcessorSpec, realized: TapSet) -> float:
    """Delay between the ideal output and the processor output.

    Centre-shifted designs are delayed by the centre tap; the integrator starts at the first
    tap and, being a rectangle sum, leads the running integral by half a tap.
    """
    extra = realized.extra_delays
    if spec.function.kind is FunctionKind.INT:
        return -realized.delta_t / 2.0 + extra[0]
    center = (realized.M - 1) / 2.0
    lo, hi = int(np.floor(center)), int(np.ceil(center))
    return center * realized.delta_t + 0.5 * (extra[lo] + extra[hi])


def _support(input: Waveform):
    significant = np.nonzero(np.abs(input.samples) > SUPPORT_THRESHOLD * input.peak)[0]
    if significant.size == 0:
        return input.t0, input.t0
    return input.t0 + significant[0] * input.dt, input.t0 + significant[-1] * input.dt


def check_window(input: Waveform, realized: TapSet):
    """Raise SimulationError unless every delayed copy of the input stays inside the window."""
    start, stop = _support(input)
    delays = realized.delays[realized.weights != 0]
    if delays.size == 0:
        return
    t_end = input.t0 + input.duration
    if stop + delays.max() > t_end or start + delays.min() < input.t0:
        raise SimulationError(
            f"Window overflow: the delayed signal spans [{start + delays.min():.4g}, {stop + delays.max():.4g}] s "
            f"but the window is [{input.t0:.4g}, {t_end:.4g}] s"
        )


def synthesize(input: Waveform, realized: TapSet, geometry: LinkGeometry, budget: ErrorBudget) -> Waveform:
    """Sum of the weighted, filtered and delayed copies of the input for an already perturbed tap set."""
    check_window(input, realized)
    n = input.count
    spectrum = sp_fft.rfft(input.samples)
    f = sp_fft.rfftfreq(n, input.dt)
    filters = channel_filter_bank(f, realized.M, geometry, budget)
    phases = np.exp(-2j * np.pi * np.multiply.outer(realized.delays, f))
    # channels summed in index order
    response = np.sum(realized.weights[:, None] * filters * phases, axis=0)
    shaped = spectrum * response
    if n % 2 == 0:
        shaped[-1] = shaped[-1].real
    samples = sp_fft.irfft(shaped, n)
    if not np.all(np.isfinite(samples)):
        raise SimulationError("Non-finite values in the synthesized output")
    return input.with_samples(samples)


def simulate(
    input: Waveform,
    spec: ProcessorSpec,
    taps: Optional[TapSet] = None,
    channel: Optional[int] = None,
    draw: Optional[int] = None,
) -> Waveform:
    """Output waveform of the processor for an input waveform.

    Parameters
    ----------
    input : Waveform
        Input microwave signal, fully contained in its window.
    spec : ProcessorSpec
    taps : TapSet, optional
        Taps to program instead of the designed ones (any length, including a single tap).
    channel : int, optional
        Only this channel is left on; the errors are drawn for the full comb first.
    draw : int, optional
        Realization index of the fast-varying comb noise, when it is not static.

    Raises
    ------
    SimulationError
        When a delayed copy leaves the window or the output is not finite.

    Examples
    --------
    >>> pulse = gaussian_pulse(0.17e-9, 0.0, 1e-12, 8192)
    >>> output = simulate(pulse, ProcessorSpec(M=80, function=TargetFunction.from_name("DIF")))
    """
    realized = perturbed_taps(spec, taps, draw)
    if channel is not None:
        if not 0 <= channel < realized.M:
            raise ConfigurationError(f"Channel index {channel} out of range for M = {realized.M}")
        realized = realized.masked(channel)
    logger.debug("Simulating %d taps over %d samples", realized.M, input.count)
    return synthesize(input, realized, spec.geometry, spec.budget)
