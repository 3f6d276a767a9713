"""
A Python package for simulating microcomb-based microwave-photonic transversal signal processors.

The package designs tap coefficients for differentiation, integration and Hilbert transformation,
injects parameterized experimental error sources (comb intensity noise, modulator chirp,
fibre second- and third-order dispersion, spectral shaping errors, delay-element errors),
quantifies processing accuracy via the RMSE against analytic references, and runs the
feedback-control loop that calibrates static errors away.

License: BSD 3-clause, see LICENSE.txt

"""

__version__ = "0.1.0"


class ProcessorError(Exception):
    """Base class for all errors raised by this package."""

    pass


class InvalidWaveformError(ProcessorError, ValueError):
    pass


class UnsupportedReferenceError(ProcessorError):
    pass


class ConfigurationError(ProcessorError, ValueError):
    pass


class SimulationError(ProcessorError):
    pass


class CalibrationError(ProcessorError):
    pass


from .signals import (  # noqa: E402
    Waveform,
    FunctionKind,
    TargetFunction,
    Grid,
    gaussian_pulse,
    ideal_output,
    reference_output,
    rmse,
    normalize_and_align,
    delay_waveform,
)
from .taps import (  # noqa: E402
    TapSet,
    LinkGeometry,
    ideal_response,
    design_taps,
    realized_response,
    processing_bandwidth,
)
from .impairments import ErrorBudget, FloorShape, ChannelFilter, ErrorSource, chirped_channel_filter  # noqa: E402
from .engine import ProcessorSpec, Corrections, Preset, simulate, preset  # noqa: E402
from .calibration import CalibrationConfig, CalibrationReport, measure_channel, calibrate  # noqa: E402
from .experiments import Scenario, SweepConfig, SweepResult, run_sweep, run_fig10, scenario  # noqa: E402
