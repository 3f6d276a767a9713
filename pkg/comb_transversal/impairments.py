"""
Models of the experimental error sources of a microcomb transversal processor.

Each stochastic model draws from its own labelled sub-stream of the budget seed, so that
switching one source on or off never changes the draws of another.

=======================================   ====================================
Error source                              Model
=======================================   ====================================
Microcomb intensity noise (OSNR)          :func:`comb_noise`
Modulator chirp with fibre dispersion     :func:`chirped_channel_filter`
SOD power fading                          :func:`sod_fade_power`
TOD delay skew                            :func:`tod_extra_delay`
Spectral shaping errors (RTCE)            :func:`rtce`
Delay-element errors                      :func:`delay_jitter`
=======================================   ====================================
"""

import enum
import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy import constants

from . import ConfigurationError
from .taps import LinkGeometry, TapSet, NM

logger = logging.getLogger(__name__)


class FloorShape(enum.Enum):
    FLAT = "FLAT"
    SINC = "SINC"


class ErrorKind(enum.Enum):
    AMPLITUDE = "amplitude"
    PHASE = "phase"
    BOTH = "amplitude and phase"


class ErrorSource(enum.Enum):
    """Modelled error sources, with the kind of tap error they cause and whether they are static."""

    COMB_NOISE = ("microcomb intensity noise", ErrorKind.AMPLITUDE, False)
    CHIRP = ("modulator chirp", ErrorKind.AMPLITUDE, True)
    SOD = ("fibre second-order dispersion", ErrorKind.AMPLITUDE, True)
    TOD = ("fibre third-order dispersion", ErrorKind.BOTH, True)
    RTCE = ("spectral shaping errors", ErrorKind.AMPLITUDE, True)
    DELAY_JITTER = ("delay-element errors", ErrorKind.PHASE, True)

    def __init__(self, description, kind, static):
        self.description = description
        self.kind = kind
        self.static = static

    def to_json(self):
        return {
            "source": self.name,
            "description": self.description,
            "kind": self.kind.value,
            "static": self.static,
        }


# labels of the RNG sub-streams; fixed forever so that draws stay reproducible
_STREAM_LABELS = {ErrorSource.COMB_NOISE: 1, ErrorSource.RTCE: 2, ErrorSource.DELAY_JITTER: 3}


@dataclass(frozen=True)
class ErrorBudget:
    """Parameters of the error sources, plus the RNG seed.

    Parameters
    ----------
    osnr_db : float
        Optical signal-to-noise ratio per comb line in dB; ``inf`` disables comb noise.
    floor_shape : FloorShape
        Shape of the intensity noise floor across the comb.
    alpha : float
        Modulator chirp parameter.
    tod_enabled : bool
        Apply the geometry's D3 as per-tap delay skew.
    rtce_range : float
        Range of the random tap coefficient errors, as a fraction (0.05 for 5%).
    delay_jitter : float
        Range of the delay-element errors, as a fraction of the tap delay.
    seed : int
        64-bit seed of all stochastic sources.
    sod_fade_enabled : bool
        Apply the cos(theta) power fading of the fibre dispersion per channel. The chirp term
        alpha * sin(theta) acts through the dispersion either way.
    tod_center_referenced : bool
        Count the TOD tap index from the centre tap, where D2 is quoted (lambda0 is the comb
        centre). When False the index counts from the first tap.
    comb_noise_static : bool
        Comb noise is frozen for a given seed. When False, every measurement redraws it.
    """

    osnr_db: float = float("inf")
    floor_shape: FloorShape = FloorShape.FLAT
    alpha: float = 0.0
    tod_enabled: bool = False
    rtce_range: float = 0.0
    delay_jitter: float = 0.0
    seed: int = 0
    sod_fade_enabled: bool = True
    tod_center_referenced: bool = True
    comb_noise_static: bool = True

    def __post_init__(self):
        if isinstance(self.floor_shape, str):
            try:
                object.__setattr__(self, "floor_shape", FloorShape[self.floor_shape.upper()])
            except KeyError:
                message = f"budget.floor_shape must be FLAT or SINC, got '{self.floor_shape}'"
                raise ConfigurationError(message) from None
        osnr = float(self.osnr_db)
        object.__setattr__(self, "osnr_db", osnr)
        if not osnr > 0:
            raise ConfigurationError(f"budget.osnr_db must be positive or infinite, got {self.osnr_db}")
        if not 0 <= self.rtce_range < 1:
            raise ConfigurationError(f"budget.rtce_range must lie in [0, 1), got {self.rtce_range}")
        if not 0 <= self.delay_jitter < 0.5:
            raise ConfigurationError(f"budget.delay_jitter must lie in [0, 0.5), got {self.delay_jitter}")
        if not self.alpha >= 0:
            raise ConfigurationError(f"budget.alpha must be non-negative, got {self.alpha}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigurationError(f"budget.seed must be a 64-bit unsigned integer, got {self.seed}")

    @classmethod
    def zero(cls, seed: int = 0) -> "ErrorBudget":
        """No error source at all: the link is an ideal delay line (limited tap number only)."""
        return cls(seed=seed, sod_fade_enabled=False)


def stream(budget: ErrorBudget, source: ErrorSource, draw: Optional[int] = None) -> np.random.Generator:
    """Independent generator for one error source; `draw` selects a fresh realization."""
    spawn_key = (_STREAM_LABELS[source],) if draw is None else (_STREAM_LABELS[source], int(draw))
    return np.random.default_rng(np.random.SeedSequence(int(budget.seed), spawn_key=spawn_key))


def sources_for_budget(budget: ErrorBudget, geometry: Optional[LinkGeometry] = None) -> List[ErrorSource]:
    """Error sources that are active for this budget."""
    active = []
    if np.isfinite(budget.osnr_db):
        active.append(ErrorSource.COMB_NOISE)
    if budget.alpha > 0:
        active.append(ErrorSource.CHIRP)
    if budget.sod_fade_enabled:
        active.append(ErrorSource.SOD)
    if budget.tod_enabled and (geometry is None or geometry.d3 != 0):
        active.append(ErrorSource.TOD)
    if budget.rtce_range > 0:
        active.append(ErrorSource.RTCE)
    if budget.delay_jitter > 0:
        active.append(ErrorSource.DELAY_JITTER)
    return active


def chirp_alpha(gamma1: float, gamma2: float) -> float:
    """Chirp parameter of a Mach-Zehnder modulator from its two arm phase efficiencies (rad/V)."""
    if gamma1 == gamma2:
        raise ConfigurationError("Chirp parameter is undefined for equal arm efficiencies")
    return (gamma1 + gamma2) / (gamma1 - gamma2)


def noise_envelope(M: int, floor_shape: FloorShape) -> np.ndarray:
    """Relative noise standard deviation per comb line, with maximum 1."""
    if floor_shape is FloorShape.FLAT or M == 1:
        if M == 1 and floor_shape is FloorShape.SINC:
            logger.warning("A sinc-shaped noise floor is flat for a single comb line")
        return np.ones(M)
    offset = np.arange(M) - (M - 1) / 2.0
    env = np.sinc(2.0 * offset / M) ** 2
    return env / np.max(env)


def comb_noise(taps: TapSet, budget: ErrorBudget, draw: Optional[int] = None, antithetic: bool = False) -> TapSet:
    """Perturb the tap weights with additive Gaussian intensity noise set by the OSNR.

    `antithetic` flips the sign of the drawn noise, the mirror realization of the same draw.
    """
    if not np.isfinite(budget.osnr_db):
        return taps
    sigma = np.max(np.abs(taps.weights)) * 10 ** (-budget.osnr_db / 10) * noise_envelope(taps.M, budget.floor_shape)
    eps = stream(budget, ErrorSource.COMB_NOISE, draw).standard_normal(taps.M) * sigma
    if antithetic:
        eps = -eps
    return taps.replace(weights=taps.weights + eps)


def _theta(f, wavelength_nm, geometry: LinkGeometry):
    lam = np.asarray(wavelength_nm, dtype=float) * NM
    return np.pi * geometry.length_m * geometry.d2_si * lam**2 * np.asarray(f, dtype=float) ** 2 / constants.c


def sod_fade_power(f, lambda_n: float, geometry: LinkGeometry):
    """RF power factor cos(theta) of dispersion-induced fading, clamped at 0.

    The angle is ``theta = pi * L * D2 * lambda_n**2 * f**2 / c`` in SI units.
    """
    f = np.asarray(f, dtype=float)
    if np.any(f < 0):
        raise ConfigurationError("sod_fade_power needs non-negative frequencies")
    result = np.maximum(np.cos(_theta(f, lambda_n, geometry)), 0.0)
    return result[()] if result.ndim == 0 else result


def power_fade_curve(f: float, d2_values, geometry: LinkGeometry) -> np.ndarray:
    """Power degradation in dB at frequency f for each D2 value (ps/nm/km), at the centre wavelength."""
    fades = []
    for d2 in d2_values:
        g = LinkGeometry(geometry.delta_lambda, geometry.length_L, d2, geometry.d3, geometry.lambda0)
        factor = sod_fade_power(f, geometry.lambda0, g)
        fades.append(10 * np.log10(factor) if factor > 0 else -np.inf)
    return np.array(fades)


@dataclass(frozen=True)
class ChannelFilter:
    """RF amplitude transfer of one wavelength channel, normalized to 1 at DC."""

    wavelength_nm: float
    geometry: LinkGeometry
    alpha: float = 0.0

    def __call__(self, f):
        return chirped_transfer(f, self.wavelength_nm, self.geometry, self.alpha)


def chirped_transfer(f, wavelength_nm, geometry: LinkGeometry, alpha: float, fade: bool = True):
    """sqrt(1 + alpha**2) * cos(theta + arctan(alpha)) for frequency f and channel wavelength(s).

    This is cos(theta) - alpha * sin(theta). Without `fade` the cos(theta) power fading is
    left out and only the chirp term remains, 1 - alpha * sin(theta).
    """
    theta = _theta(f, wavelength_nm, geometry)
    if not fade:
        return 1 - alpha * np.sin(theta)
    return np.sqrt(1 + alpha**2) * np.cos(theta + np.arctan(alpha))


def chirped_channel_filter(n: int, geometry: LinkGeometry, alpha: float, M: int = 80) -> ChannelFilter:
    """Combined chirp and dispersion transfer of channel n of an M-line comb."""
    if not 0 <= n < M:
        raise ConfigurationError(f"Channel index {n} out of range for M = {M}")
    return ChannelFilter(float(geometry.channel_wavelengths(M)[n]), geometry, alpha)


def channel_filter_bank(f, M: int, geometry: LinkGeometry, budget: ErrorBudget) -> np.ndarray:
    """Transfer of all M channels on a frequency grid, shape (M, len(f)); all ones without chirp or fade."""
    f = np.asarray(f, dtype=float)
    if not budget.sod_fade_enabled and budget.alpha == 0:
        return np.ones((M, f.size))
    wavelengths = geometry.channel_wavelengths(M)[:, None]
    return chirped_transfer(f[None, :], wavelengths, geometry, budget.alpha, fade=budget.sod_fade_enabled)


def tod_extra_delay(n, geometry: LinkGeometry, M: Optional[int] = None, center_referenced: bool = False):
    """Third-order dispersion delay D3 * L * delta_lambda**2 * n**2 of tap n, in seconds.

    The index counts from the first tap unless `center_referenced`, in which case it
    counts from (M-1)/2.
    """
    n = np.asarray(n, dtype=float)
    if center_referenced:
        if M is None:
            raise ConfigurationError("Centre-referenced TOD needs the tap number M")
        n = n - (M - 1) / 2.0
    result = geometry.d3_si * geometry.length_m * geometry.delta_lambda_m**2 * n**2
    return result[()] if result.ndim == 0 else result


def rtce(taps: TapSet, budget: ErrorBudget) -> TapSet:
    """Multiplicative uniform shaping errors within +/- rtce_range."""
    if budget.rtce_range == 0:
        return taps
    u = stream(budget, ErrorSource.RTCE).uniform(-1.0, 1.0, taps.M) * budget.rtce_range
    return taps.replace(weights=taps.weights * (1 + u))


def delay_jitter(taps: TapSet, budget: ErrorBudget) -> TapSet:
    """Uniform per-tap delay errors within +/- delay_jitter * delta_t."""
    if budget.delay_jitter == 0:
        return taps
    v = stream(budget, ErrorSource.DELAY_JITTER).uniform(-1.0, 1.0, taps.M) * budget.delay_jitter
    return taps.replace(extra_delays=taps.extra_delays + v * taps.delta_t)


def apply_tod(taps: TapSet, geometry: LinkGeometry, budget: ErrorBudget) -> TapSet:
    if not budget.tod_enabled or geometry.d3 == 0:
        return taps
    extra = tod_extra_delay(np.arange(taps.M), geometry, taps.M, budget.tod_center_referenced)
    return taps.replace(extra_delays=taps.extra_delays + extra)


def apply_budget(
    taps: TapSet,
    geometry: LinkGeometry,
    budget: ErrorBudget,
    gains: Optional[np.ndarray] = None,
    delay_trims: Optional[np.ndarray] = None,
    draw: Optional[int] = None,
    antithetic: bool = False,
) -> TapSet:
    """Apply the tap-level error models in the order comb noise, RTCE, delay errors, TOD.

    `gains` and `delay_trims` are the spectral-shaper settings of a calibration; the gains
    act on the comb lines after their intensity noise and before the shaping errors.
    `antithetic` takes the mirror comb noise realization.
    """
    perturbed = comb_noise(taps, budget, None if budget.comb_noise_static else draw, antithetic)
    if gains is not None:
        perturbed = perturbed.replace(weights=perturbed.weights * gains)
    perturbed = rtce(perturbed, budget)
    perturbed = delay_jitter(perturbed, budget)
    perturbed = apply_tod(perturbed, geometry, budget)
    if delay_trims is not None:
        perturbed = perturbed.replace(extra_delays=perturbed.extra_delays + delay_trims)
    return perturbed


