"""
Feedback-control calibration of the tap weights.

The impulse response of the processor is measured channel by channel with a short probe
pulse, compared with the designed taps, and the spectral-shaper gains (optionally the
per-channel delays) are corrected until the measured taps match the design.
"""

import logging
from dataclasses import dataclass, replace
from typing import List, Optional, Tuple
from warnings import warn

import numpy as np

from . import CalibrationError, ConfigurationError
from .engine import Corrections, ProcessorSpec, delay_span, simulate
from .signals import Grid, Waveform
from .taps import TapSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CalibrationConfig:
    """Parameters of the feedback loop.

    Parameters
    ----------
    damping : float
        Fraction of the measured error corrected per iteration, in (0, 1].
    max_iter : int
        Maximum number of measure/correct iterations.
    tol : float
        Stop when max|error| / max|target weight| falls below this value.
    phase_correction : bool
        Also trim the delay of each channel towards its nominal value.
    probe_fwhm : float
        FWHM of the Gaussian probe pulse, in seconds.
    """

    damping: float = 0.5
    max_iter: int = 20
    tol: float = 1e-3
    phase_correction: bool = False
    probe_fwhm: float = 0.17e-9

    def __post_init__(self):
        if not 0 < self.damping <= 1:
            raise ConfigurationError(f"calibration.damping must lie in (0, 1], got {self.damping}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ConfigurationError(f"calibration.max_iter must be a positive integer, got {self.max_iter}")
        if not self.tol > 0:
            raise ConfigurationError(f"calibration.tol must be positive, got {self.tol}")
        if not self.probe_fwhm > 0:
            raise ConfigurationError(f"calibration.probe_fwhm must be positive, got {self.probe_fwhm}")


@dataclass(frozen=True)
class CalibrationReport:
    """Outcome of a calibration run.

    ``residual_per_iteration[k]`` is the relative error measured at the start of iteration k + 1.
    The RMSE fields are filled in by :func:`comb_transversal.experiments.calibration_rmse`.
    """

    iterations_used: int
    residual_per_iteration: Tuple[float, ...]
    final_corrections: Corrections
    converged: bool
    rmse_before: Optional[float] = None
    rmse_after: Optional[float] = None
    rmse_theoretical: Optional[float] = None

    @property
    def final_residual(self) -> float:
        return self.residual_per_iteration[-1]

    def with_rmse(self, before: float, after: float, theoretical: float) -> "CalibrationReport":
        return replace(self, rmse_before=before, rmse_after=after, rmse_theoretical=theoretical)

    def to_csv_rows(self) -> List[tuple]:
        """Header and one (iteration, residual) row per iteration."""
        rows = [("iteration", "residual")]
        rows.extend((k + 1, r) for k, r in enumerate(self.residual_per_iteration))
        return rows


def _interpolated_peak(samples: np.ndarray) -> Tuple[float, float]:
    """Signed peak value and fractional index of the largest-magnitude sample.

    A parabola through the logarithm of the three samples around the maximum, which is
    exact for a Gaussian pulse.
    """
    k = int(np.argmax(np.abs(samples)))
    peak = samples[k]
    if peak == 0:
        return 0.0, float("nan")
    if k == 0 or k == samples.size - 1:
        return float(peak), float(k)
    neighbours = np.abs(samples[k - 1 : k + 2])
    if np.any(neighbours == 0) or np.sign(samples[k - 1]) != np.sign(peak) or np.sign(samples[k + 1]) != np.sign(peak):
        return float(peak), float(k)
    y_left, y_mid, y_right = np.log(neighbours)
    curvature = y_left - 2 * y_mid + y_right
    if curvature >= 0:
        return float(peak), float(k)
    offset = 0.5 * (y_left - y_right) / curvature
    log_peak = y_mid - 0.25 * (y_left - y_right) * offset
    return float(np.sign(peak) * np.exp(log_peak)), k + offset


def measure_channel(
    spec: ProcessorSpec,
    n: int,
    probe: Waveform,
    taps: Optional[TapSet] = None,
    draw: Optional[int] = None,
) -> Tuple[float, float]:
    """Impulse response of channel n alone.

    Parameters
    ----------
    spec : ProcessorSpec
    n : int
        Channel index.
    probe : Waveform
        Short pulse fully inside the window.
    taps : TapSet, optional
        Programmed taps; the spec's design by default.
    draw : int, optional
        Comb noise realization, for fast-varying noise.

    Returns
    -------
    (float, float)
        The signed peak amplitude relative to the probe peak, and the channel delay
        (peak location minus probe centre) in seconds. The delay is NaN for a dead channel.

    Raises
    ------
    CalibrationError
        If n is not a channel of the processor.
    """
    M = spec.M if taps is None else taps.M
    if not 0 <= n < M:
        raise CalibrationError(f"Channel index {n} out of range for M = {M}")
    response = simulate(probe, spec, taps=taps, channel=n, draw=draw)
    amplitude, location = _interpolated_peak(response.samples)
    probe_peak, probe_center = _interpolated_peak(probe.samples)
    return amplitude / probe_peak, (location - probe_center) * probe.dt


def calibrate(
    spec: ProcessorSpec,
    target: TapSet,
    cfg: Optional[CalibrationConfig] = None,
    probe: Optional[Waveform] = None,
) -> Tuple[ProcessorSpec, CalibrationReport]:
    """Iteratively correct the spectral-shaper settings until the measured taps match `target`.

    Each iteration measures all channels, forms the errors ``e_n = a_n - m_n`` and updates the
    gains by ``g_n *= 1 + damping * e_n / m_n``; with phase correction the channel delay trims
    move by ``-damping * (measured - n * delta_t)``. The target is never modified.

    Returns
    -------
    (ProcessorSpec, CalibrationReport)
        The spec carrying the final corrections, and the report.

    Raises
    ------
    CalibrationError
        When a channel with a non-zero target weight measures exactly zero.

    Examples
    --------
    >>> spec = preset("PROCESSOR_1")
    >>> corrected, report = calibrate(spec, spec.design(), CalibrationConfig(phase_correction=True))
    """
    cfg = cfg or CalibrationConfig()
    if target.M != spec.M:
        raise ConfigurationError(f"target has {target.M} taps but M = {spec.M}")
    if probe is None:
        probe = Grid(fwhm=cfg.probe_fwhm).fitted(*delay_span(spec)).pulse()
    corrections = spec.corrections or Corrections.identity(spec.M)
    scale = float(np.max(np.abs(target.weights)))
    if scale == 0:
        raise ConfigurationError("target taps are all zero")
    nominal = np.arange(spec.M) * target.delta_t
    redraw = not spec.budget.comb_noise_static

    residuals = []
    converged = False
    for iteration in range(cfg.max_iter):
        current = spec.with_corrections(corrections)
        draw = iteration if redraw else None
        measured = np.array([measure_channel(current, n, probe, taps=target, draw=draw) for n in range(spec.M)])
        amplitudes, delays = measured[:, 0], measured[:, 1]
        errors = target.weights - amplitudes
        residual = float(np.max(np.abs(errors)) / scale)
        residuals.append(residual)
        logger.info("Calibration iteration %d: residual %.3g", iteration + 1, residual)
        if residual < cfg.tol:
            converged = True
            break

        dead = (amplitudes == 0) & (target.weights != 0)
        if np.any(dead):
            raise CalibrationError(f"Dead channel(s) {np.nonzero(dead)[0].tolist()}: no response to the probe")
        live = amplitudes != 0
        ratio = np.divide(errors, amplitudes, out=np.zeros_like(errors), where=live)
        gains = corrections.gains * (1 + cfg.damping * ratio)
        trims = np.array(corrections.delay_trims)
        if cfg.phase_correction:
            trims[live] -= cfg.damping * (delays[live] - nominal[live])
        corrections = Corrections(gains, trims)

    if not converged:
        message = (
            f"Calibration did not reach tol = {cfg.tol} in {len(residuals)} iterations "
            f"(final residual {residuals[-1]:.3g})"
        )
        if redraw:
            message += "; fast-varying comb noise cannot be compensated"
        logger.warning(message)
        warn(message)

    report = CalibrationReport(
        iterations_used=len(residuals),
        residual_per_iteration=tuple(residuals),
        final_corrections=corrections,
        converged=converged,
    )
    return spec.with_corrections(corrections), report
