"""
Tap coefficient design, realized spectral response and processor bandwidth.

Tap weights are designed by frequency sampling: the ideal response is sampled at M
uniform frequencies, centre-shifted to tap (M-1)/2 and inverse transformed.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import constants
from scipy import fft as sp_fft

from . import ConfigurationError, UnsupportedReferenceError
from .signals import FunctionKind, TargetFunction

logger = logging.getLogger(__name__)

# unit conversions into SI, applied once in LinkGeometry
NM = 1e-9
KM = 1e3
PS = 1e-12
PS_PER_NM_KM = PS / (NM * KM)
PS_PER_NM2_KM = PS / (NM**2 * KM)


@dataclass(frozen=True, eq=False)
class TapSet:
    """Signed tap weights with the nominal inter-tap delay and per-tap delay offsets.

    Parameters
    ----------
    weights : array-like
        Tap coefficients a_n, n = 0 ... M-1. Negative values are taken by the
        complementary port of the balanced photodetector.
    delta_t : float
        Nominal delay between adjacent taps, in seconds.
    extra_delays : array-like, optional
        Additional delay per tap, in seconds. All zero by default.
    """

    weights: np.ndarray
    delta_t: float
    extra_delays: Optional[np.ndarray] = None

    def __post_init__(self):
        weights = np.array(self.weights, dtype=float).ravel()
        if weights.size < 1:
            raise ConfigurationError("TapSet.weights must contain at least one tap")
        if self.extra_delays is None:
            extra = np.zeros_like(weights)
        else:
            extra = np.array(self.extra_delays, dtype=float).ravel()
        if extra.size != weights.size:
            raise ConfigurationError(
                f"TapSet.extra_delays has {extra.size} entries but there are {weights.size} weights"
            )
        if not (np.all(np.isfinite(weights)) and np.all(np.isfinite(extra))):
            raise ConfigurationError("TapSet.weights and TapSet.extra_delays must be finite")
        if not (np.isfinite(self.delta_t) and self.delta_t > 0):
            raise ConfigurationError(f"TapSet.delta_t must be positive, got {self.delta_t}")
        weights.setflags(write=False)
        extra.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "extra_delays", extra)

    @property
    def M(self) -> int:
        return self.weights.size

    @property
    def delays(self) -> np.ndarray:
        """Total delay of each tap, n*delta_t + extra_delays[n]."""
        return np.arange(self.M) * self.delta_t + self.extra_delays

    def replace(self, weights=None, extra_delays=None) -> "TapSet":
        return TapSet(
            self.weights if weights is None else weights,
            self.delta_t,
            self.extra_delays if extra_delays is None else extra_delays,
        )

    def masked(self, channel: int) -> "TapSet":
        """Keep a single channel, zeroing all other weights."""
        weights = np.zeros(self.M)
        weights[channel] = self.weights[channel]
        return self.replace(weights=weights)


@dataclass(frozen=True)
class LinkGeometry:
    """Comb spacing, dispersive fibre and wavelength plan, in the customary lab units.

    Parameters
    ----------
    delta_lambda : float
        Comb spacing, in nm.
    length_L : float
        Fibre length, in km.
    d2 : float
        Second-order dispersion parameter, in ps/nm/km.
    d3 : float
        Third-order dispersion parameter, in ps/nm^2/km.
    lambda0 : float
        Centre wavelength, in nm.
    tap_delay : float, optional
        Inter-tap delay in ps, when the delay element is set independently of
        ``delta_lambda * length_L * d2`` (used when sweeping the fade-causing D2 at fixed delay).
    """

    delta_lambda: float = 0.4
    length_L: float = 4.8
    d2: float = 17.4
    d3: float = 0.0
    lambda0: float = 1550.0
    tap_delay: Optional[float] = None

    def __post_init__(self):
        if not self.delta_lambda > 0:
            raise ConfigurationError(f"geometry.delta_lambda must be positive, got {self.delta_lambda}")
        if not self.length_L > 0:
            raise ConfigurationError(f"geometry.length_L must be positive, got {self.length_L}")
        if self.d2 == 0:
            raise ConfigurationError("geometry.d2 must be non-zero (the tap delay would vanish)")
        if not 1000 <= self.lambda0 <= 2000:
            raise ConfigurationError(f"geometry.lambda0 must lie in 1000-2000 nm, got {self.lambda0}")
        if self.tap_delay is not None and not self.tap_delay > 0:
            raise ConfigurationError(f"geometry.tap_delay must be positive, got {self.tap_delay}")

    @property
    def delta_lambda_m(self) -> float:
        return self.delta_lambda * NM

    @property
    def length_m(self) -> float:
        return self.length_L * KM

    @property
    def d2_si(self) -> float:
        return self.d2 * PS_PER_NM_KM

    @property
    def d3_si(self) -> float:
        return self.d3 * PS_PER_NM2_KM

    @property
    def lambda0_m(self) -> float:
        return self.lambda0 * NM

    @property
    def delta_t(self) -> float:
        """Inter-tap delay in seconds."""
        if self.tap_delay is not None:
            return self.tap_delay * PS
        return abs(self.delta_lambda_m * self.length_m * self.d2_si)

    @property
    def comb_spacing_hz(self) -> float:
        return constants.c * self.delta_lambda_m / self.lambda0_m**2

    def channel_wavelengths(self, M: int) -> np.ndarray:
        """Wavelength of each comb line in nm, centred on lambda0."""
        return self.lambda0 + (np.arange(M) - (M - 1) / 2.0) * self.delta_lambda


def ideal_response(func: TargetFunction, omega, M: Optional[int] = None):
    """Ideal transfer function at normalized angular frequency omega in [-pi, pi).

    DIF is j*omega, INT is 1/(j*omega) regularized below omega_min = 2*pi/M,
    HT is exp(+j*pi/2) for omega >= 0 and exp(-j*pi/2) below.

    Parameters
    ----------
    func : TargetFunction
    omega : float or array
        Frequency normalized to the tap-rate Nyquist band (omega = pi at FSR_MW / 2).
    M : int, optional
        Tap number, setting the INT regularization. Defaults to 80.

    Raises
    ------
    UnsupportedReferenceError
        For PHASE_ENCODE, whose taps are given directly.
    """
    omega = np.asarray(omega, dtype=float)
    kind = func.kind
    if kind is FunctionKind.DIF:
        result = 1j * omega
    elif kind is FunctionKind.INT:
        omega_min = 2 * np.pi / (M or 80)
        sign = np.where(omega < 0, -1.0, 1.0)
        result = 1.0 / (1j * sign * np.maximum(np.abs(omega), omega_min))
    elif kind is FunctionKind.HT:
        result = np.where(omega >= 0, 1j, -1j)
    else:
        raise UnsupportedReferenceError(f"{kind.value} taps are given directly and have no designed response")
    return result[()] if result.ndim == 0 else result


def _causal_target(func: TargetFunction, omega, M: int):
    # taps realize -j*sign(omega) under the causal exp(-j*omega*n) kernel, matching ideal_output
    response = ideal_response(func, omega, M)
    if func.kind is FunctionKind.HT:
        return -response
    return response


def design_frequencies(M: int) -> np.ndarray:
    """The M uniform design frequencies 2*pi*k/M, wrapped into [-pi, pi)."""
    omega = 2 * np.pi * np.arange(M) / M
    return np.where(omega >= np.pi, omega - 2 * np.pi, omega)


def frequency_sampling_weights(func: TargetFunction, M: int) -> np.ndarray:
    """Inverse-DFT of the centre-shifted ideal response at the M design frequencies."""
    omega = design_frequencies(M)
    center = (M - 1) / 2.0
    samples = _causal_target(func, omega, M) * np.exp(-1j * omega * center)
    weights = sp_fft.ifft(samples)
    imaginary = np.max(np.abs(weights.imag))
    if imaginary > 1e-9 * np.max(np.abs(weights.real)):
        logger.debug("Discarding imaginary residue %.3g of the %s design", imaginary, func.name)
    return weights.real


def design_taps(func: TargetFunction, M: int, geometry: LinkGeometry) -> TapSet:
    """Compute the tap coefficients realizing a processing function.

    INT uses all-ones taps and PHASE_ENCODE its sign pattern verbatim; DIF and HT are
    designed by frequency sampling. The weights are scaled to a maximum magnitude of 1.

    Examples
    --------
    >>> taps = design_taps(TargetFunction.from_name("hilbert"), 80, LinkGeometry())
    """
    if M < 2:
        raise ConfigurationError(f"M must be at least 2, got {M}")
    kind = func.kind
    if kind is FunctionKind.PHASE_ENCODE:
        if len(func.pattern) != M:
            raise ConfigurationError(f"PHASE_ENCODE pattern has {len(func.pattern)} entries but M = {M}")
        weights = np.array(func.pattern, dtype=float)
    elif kind is FunctionKind.INT:
        weights = np.ones(M)
    else:
        weights = frequency_sampling_weights(func, M)
        weights = weights / np.max(np.abs(weights))
    logger.debug("Designed %d %s taps, delta_t = %.4g s", M, func.name, geometry.delta_t)
    return TapSet(weights, geometry.delta_t)


def realized_response(taps: TapSet, omega_rf):
    """Spectral response sum_n a_n exp(-j*omega*(n*delta_t + extra_delays[n])) at omega_rf in rad/s."""
    omega_rf = np.asarray(omega_rf, dtype=float)
    phase = np.exp(-1j * np.multiply.outer(omega_rf, taps.delays))
    result = phase @ taps.weights
    return result[()] if np.ndim(result) == 0 else result


def processing_bandwidth(geometry: LinkGeometry) -> Tuple[float, float]:
    """Free spectral range of the RF response and the usable processing band, in Hz.

    Returns
    -------
    (float, float)
        ``fsr_mw = 1 / delta_t`` and ``min(comb spacing / 2, fsr_mw / 2)``, the comb
        spacing being converted to Hz as ``c * delta_lambda / lambda0**2``.
    """
    fsr_mw = 1.0 / geometry.delta_t
    return fsr_mw, min(geometry.comb_spacing_hz / 2.0, fsr_mw / 2.0)
