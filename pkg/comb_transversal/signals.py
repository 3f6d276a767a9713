"""
Waveforms, test signals, analytic references and the RMSE metric.

The following functions are available:

=======================================   ====================================
Action                                    Function
=======================================   ====================================
Generate the Gaussian test pulse          :func:`gaussian_pulse`
Compute the analytic ideal output         :func:`ideal_output`
Ideal output of a grid's test pulse       :func:`reference_output`
Delay a waveform by a fractional time     :func:`delay_waveform`
Peak-normalize and time-align outputs     :func:`normalize_and_align`
Root mean square error                    :func:`rmse`
=======================================   ====================================

All spectral operations use the real FFT of :mod:`scipy.fft`, so a fractional
delay is an exact linear phase for band-limited (fully contained) signals.
"""

import enum
import logging
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy import fft as sp_fft
from scipy.integrate import cumulative_trapezoid
from scipy.signal import hilbert

from . import InvalidWaveformError, UnsupportedReferenceError

logger = logging.getLogger(__name__)

FOUR_LN2 = 4.0 * np.log(2.0)


@dataclass(frozen=True, eq=False)
class Waveform:
    """Uniformly sampled real-valued time series.

    Parameters
    ----------
    t0 : float
        Time of the first sample, in seconds.
    dt : float
        Sample interval, in seconds.
    samples : array-like
        Real amplitudes (arbitrary units). Stored as a read-only float64 array.
    """

    t0: float
    dt: float
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        if samples.ndim != 1:
            raise InvalidWaveformError("Waveform samples must be one-dimensional")
        if not self.dt > 0:
            raise InvalidWaveformError(f"Waveform dt must be positive, got {self.dt}")
        if samples.size < 2:
            raise InvalidWaveformError(f"Waveform needs at least 2 samples, got {samples.size}")
        if not np.all(np.isfinite(samples)):
            raise InvalidWaveformError("Waveform samples must all be finite")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def count(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return (self.count - 1) * self.dt

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.count)

    @property
    def peak(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def with_samples(self, samples) -> "Waveform":
        """Same grid, new samples."""
        return Waveform(self.t0, self.dt, samples)

    def same_grid(self, other: "Waveform") -> bool:
        return self.count == other.count and np.isclose(self.dt, other.dt, rtol=1e-12, atol=0.0)

    def crop(self, center_index: int, count: int) -> "Waveform":
        """Return `count` samples centred on `center_index` (clipped to the window)."""
        start = max(0, min(center_index - count // 2, self.count - count))
        stop = min(self.count, start + count)
        return Waveform(self.t0 + start * self.dt, self.dt, self.samples[start:stop])

    def __add__(self, other: "Waveform") -> "Waveform":
        _check_same_grid(self, other)
        return self.with_samples(self.samples + other.samples)

    def __mul__(self, factor: float) -> "Waveform":
        return self.with_samples(self.samples * factor)

    __rmul__ = __mul__


class FunctionKind(enum.Enum):
    DIF = "DIF"
    INT = "INT"
    HT = "HT"
    PHASE_ENCODE = "PHASE_ENCODE"


_FUNCTION_ALIASES = {
    "dif": FunctionKind.DIF,
    "differentiator": FunctionKind.DIF,
    "differentiation": FunctionKind.DIF,
    "int": FunctionKind.INT,
    "integrator": FunctionKind.INT,
    "integration": FunctionKind.INT,
    "ht": FunctionKind.HT,
    "hilbert": FunctionKind.HT,
}


@dataclass(frozen=True)
class TargetFunction:
    """Processing function realized by the transversal filter.

    `pattern` is only used by PHASE_ENCODE, whose taps are the +1/-1 entries themselves.
    """

    kind: FunctionKind
    pattern: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if self.kind is FunctionKind.PHASE_ENCODE:
            if not self.pattern:
                raise InvalidWaveformError("PHASE_ENCODE needs a non-empty sign pattern")
            pattern = tuple(int(p) for p in self.pattern)
            if any(p not in (1, -1) for p in pattern):
                raise InvalidWaveformError(f"PHASE_ENCODE pattern entries must be +1 or -1, got {self.pattern}")
            object.__setattr__(self, "pattern", pattern)
        elif self.pattern is not None:
            raise InvalidWaveformError(f"A sign pattern is only meaningful for PHASE_ENCODE, not {self.kind.value}")

    @classmethod
    def phase_encode(cls, pattern) -> "TargetFunction":
        return cls(FunctionKind.PHASE_ENCODE, tuple(pattern))

    @classmethod
    def from_name(cls, name) -> "TargetFunction":
        """Parse "DIF", "hilbert", "integrator"... or a {"PHASE_ENCODE": [...]} mapping."""
        if isinstance(name, TargetFunction):
            return name
        if isinstance(name, FunctionKind):
            return cls(name)
        if isinstance(name, dict) and set(name) == {"PHASE_ENCODE"}:
            return cls.phase_encode(name["PHASE_ENCODE"])
        try:
            return cls(_FUNCTION_ALIASES[str(name).strip().lower()])
        except KeyError:
            raise ValueError(f"Unknown processing function '{name}'. Valid: DIF, INT, HT, PHASE_ENCODE") from None

    @property
    def name(self) -> str:
        return self.kind.value

    def to_json(self):
        if self.kind is FunctionKind.PHASE_ENCODE:
            return {"PHASE_ENCODE": list(self.pattern)}
        return self.kind.value


DIF = TargetFunction(FunctionKind.DIF)
INT = TargetFunction(FunctionKind.INT)
HT = TargetFunction(FunctionKind.HT)


def _check_same_grid(a: Waveform, b: Waveform):
    if not a.same_grid(b):
        raise InvalidWaveformError(
            f"Waveforms are on different grids: ({a.count} samples, dt={a.dt}) vs ({b.count} samples, dt={b.dt})"
        )


def gaussian_pulse(fwhm: float, t0: float, dt: float, count: int, center: Optional[float] = None) -> Waveform:
    """Unit-peak Gaussian pulse.

    Parameters
    ----------
    fwhm : float
        Full width at half maximum, in seconds.
    t0 : float
        Time of the first sample, in seconds.
    dt : float
        Sample interval, in seconds.
    count : int
        Number of samples.
    center : float, optional
        Pulse centre. Defaults to the window centre sample, ``t0 + (count // 2) * dt``,
        so that the peak value is exactly 1.

    Returns
    -------
    Waveform

    Examples
    --------
    >>> pulse = gaussian_pulse(0.17e-9, 0.0, 1e-12, 8192)
    """
    if not fwhm > 0:
        raise InvalidWaveformError(f"Pulse FWHM must be positive, got {fwhm}")
    if count * dt < 6 * fwhm:
        raise InvalidWaveformError(
            f"Window of {count} x {dt} s is shorter than 6 x FWHM ({6 * fwhm} s): the pulse would be truncated"
        )
    if center is None:
        center = t0 + (count // 2) * dt
    t = t0 + dt * np.arange(count)
    return Waveform(t0, dt, np.exp(-FOUR_LN2 * (t - center) ** 2 / fwhm**2))


# the Gaussian is below 1e-12 of its peak beyond this many FWHM from its centre
PULSE_SUPPORT_FWHM = 3.2


@dataclass(frozen=True)
class Grid:
    """Time grid of the test pulse and the observation window used for the RMSE.

    Parameters
    ----------
    dt : float
        Sample interval, in seconds.
    count : int
        Number of samples; the pulse sits on sample ``count // 2``.
    fwhm : float
        FWHM of the Gaussian test pulse, in seconds.
    observation : int
        Number of samples around the pulse compared against the ideal output.
    """

    dt: float = 1e-12
    count: int = 8192
    fwhm: float = 0.17e-9
    observation: int = 4096

    def __post_init__(self):
        if not self.dt > 0:
            raise InvalidWaveformError(f"grid.dt must be positive, got {self.dt}")
        if int(self.count) != self.count or self.count < 2:
            raise InvalidWaveformError(f"grid.count must be an integer of at least 2, got {self.count}")
        if not 2 <= self.observation <= self.count:
            raise InvalidWaveformError(
                f"grid.observation must lie in [2, count = {self.count}], got {self.observation}"
            )

    @property
    def center_index(self) -> int:
        return self.count // 2

    def pulse(self) -> Waveform:
        return gaussian_pulse(self.fwhm, 0.0, self.dt, self.count)

    def observe(self, waveform: Waveform) -> Waveform:
        """Crop a waveform on this grid to the observation window around the pulse."""
        return waveform.crop(self.center_index, self.observation)

    def fitted(self, earliest: float, latest: float) -> "Grid":
        """Smallest grid, doubling the count, whose window holds the pulse delayed anywhere in [earliest, latest]."""
        reach = max(-earliest, latest, 0.0) + PULSE_SUPPORT_FWHM * self.fwhm
        count = self.count
        while (count // 2 - 1) * self.dt < reach:
            count *= 2
        if count != self.count:
            logger.info(
                "Growing the grid from %d to %d samples to hold a %.3g s delay spread", self.count, count, reach
            )
        return replace(self, count=count)


def _spectral_multiply(samples: np.ndarray, dt: float, response) -> np.ndarray:
    n = samples.size
    spectrum = sp_fft.rfft(samples)
    f = sp_fft.rfftfreq(n, dt)
    shaped = spectrum * response(f)
    if n % 2 == 0:
        # the Nyquist bin of a real signal cannot carry an imaginary part
        shaped[-1] = shaped[-1].real
    return sp_fft.irfft(shaped, n)


def ideal_output(func: TargetFunction, input: Waveform) -> Waveform:
    """Analytic ideal processing result for the input waveform.

    DIF multiplies the spectrum by j*omega, INT is the running (trapezoidal) integral,
    HT multiplies the spectrum by -j*sign(f).

    Raises
    ------
    UnsupportedReferenceError
        For PHASE_ENCODE, which has no analytic reference.
    """
    kind = func.kind
    if kind is FunctionKind.DIF:
        samples = _spectral_multiply(input.samples, input.dt, lambda f: 2j * np.pi * f)
    elif kind is FunctionKind.INT:
        samples = cumulative_trapezoid(input.samples, dx=input.dt, initial=0.0)
    elif kind is FunctionKind.HT:
        samples = np.imag(hilbert(input.samples))
    else:
        raise UnsupportedReferenceError(f"No analytic reference exists for {kind.value}")
    return input.with_samples(samples)


# samples of the padded window the grid references are computed on
REFERENCE_COUNT = 2**18


@lru_cache(maxsize=32)
def reference_output(func: TargetFunction, grid: Grid) -> Waveform:
    """Ideal output for the test pulse of `grid`, independent of the grid length.

    The Hilbert transform of a pulse decays as 1/t, so a circular transform over the grid
    folds its tails back into the window. The reference is computed on a window of at least
    REFERENCE_COUNT samples and cropped back to the grid around the pulse.

    Examples
    --------
    >>> reference = reference_output(HT, Grid())
    >>> reference.count
    8192
    """
    padded = replace(grid, count=max(grid.count, REFERENCE_COUNT))
    ideal = ideal_output(func, padded.pulse()).crop(padded.center_index, grid.count)
    return Waveform(0.0, grid.dt, ideal.samples)


def delay_waveform(waveform: Waveform, delay: float) -> Waveform:
    """Delay (positive) or advance (negative) a waveform by an arbitrary time, as a spectral linear phase.

    The shift is circular over the window; the caller keeps the signal contained.
    """
    if delay == 0:
        return waveform
    return waveform.with_samples(
        _spectral_multiply(waveform.samples, waveform.dt, lambda f: np.exp(-2j * np.pi * f * delay))
    )


def rmse(ideal: Waveform, actual: Waveform) -> float:
    """Root mean square error between an ideal and an actual waveform sharing one grid.

    Examples
    --------
    >>> rmse(Waveform(0, 1, [1, 0, 0, 0]), Waveform(0, 1, [0, 0, 0, 0]))
    0.5
    """
    _check_same_grid(ideal, actual)
    return float(np.sqrt(np.mean((ideal.samples - actual.samples) ** 2)))


def _unit_peak(waveform: Waveform) -> Waveform:
    peak = waveform.peak
    if peak == 0:
        raise InvalidWaveformError("Cannot normalize an all-zero waveform")
    return waveform * (1.0 / peak)


def normalize_and_align(actual: Waveform, reference: Waveform, bulk_delay: float) -> Tuple[Waveform, Waveform]:
    """Advance `actual` by `bulk_delay` and scale both waveforms to unit peak.

    Returns
    -------
    (Waveform, Waveform)
        The aligned actual output and the normalized reference, on the reference grid.
    """
    _check_same_grid(actual, reference)
    aligned = delay_waveform(actual, -bulk_delay)
    aligned = Waveform(reference.t0, reference.dt, aligned.samples)
    return _unit_peak(aligned), _unit_peak(reference)
