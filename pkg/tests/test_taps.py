import numpy as np
import pytest

from comb_transversal import ConfigurationError, UnsupportedReferenceError
from comb_transversal.signals import DIF, HT, INT, TargetFunction
from comb_transversal.taps import (
    LinkGeometry,
    TapSet,
    design_frequencies,
    design_taps,
    frequency_sampling_weights,
    ideal_response,
    processing_bandwidth,
    realized_response,
)

"""
1] Link geometry and processing bandwidth.
"""


# 1.1) Tap delay of the standard link
def test_geometry_delta_t(geometry):
    assert geometry.delta_t == pytest.approx(33.408e-12, rel=1e-9)


# 1.2) Free spectral range and usable band
def test_processingBandwidth(geometry):
    fsr, usable = processing_bandwidth(geometry)
    assert fsr == pytest.approx(29.93e9, rel=5e-3)
    assert usable == pytest.approx(fsr / 2, rel=1e-12)
    assert geometry.comb_spacing_hz == pytest.approx(49.96e9, rel=2e-3)


# 1.3) Held tap delay
def test_geometry_tap_delay_override():
    geometry = LinkGeometry(d2=5.0, tap_delay=33.408)
    assert geometry.delta_t == pytest.approx(33.408e-12, rel=1e-12)


# 1.4) Invalid fields name the field
@pytest.mark.parametrize(
    "kwargs, field", [({"d2": 0.0}, "d2"), ({"delta_lambda": -0.4}, "delta_lambda"), ({"length_L": 0}, "length_L")]
)
def test_geometry_invalid(kwargs, field):
    with pytest.raises(ConfigurationError) as excinfo:
        LinkGeometry(**kwargs)
    assert field in str(excinfo.value)


# 1.5) Channel wavelengths are centred on lambda0
def test_geometry_channel_wavelengths(geometry):
    wavelengths = geometry.channel_wavelengths(80)
    assert wavelengths[0] == pytest.approx(1550.0 - 15.8)
    assert wavelengths[-1] == pytest.approx(1550.0 + 15.8)


"""
2] Ideal responses.
"""


# 2.1) Differentiator
def test_idealResponse_dif():
    assert ideal_response(DIF, 0.5) == 0.5j
    np.testing.assert_allclose(ideal_response(DIF, [-1.0, 1.0]), [-1j, 1j])


# 2.2) Integrator, regularized near DC
def test_idealResponse_int():
    omega_min = 2 * np.pi / 80
    assert ideal_response(INT, 1.0, M=80) == pytest.approx(-1j)
    assert ideal_response(INT, 0.0, M=80) == pytest.approx(1 / (1j * omega_min))
    assert ideal_response(INT, -0.01, M=80) == pytest.approx(-1 / (1j * omega_min))


# 2.3) Hilbert transformer
def test_idealResponse_ht():
    np.testing.assert_array_equal(ideal_response(HT, [-0.5, 0.0, 0.5]), [-1j, 1j, 1j])


# 2.4) Phase encoding has no designed response
def test_idealResponse_phase_encode():
    with pytest.raises(UnsupportedReferenceError):
        ideal_response(TargetFunction.phase_encode([1, -1]), 0.1)


"""
3] Tap design.
"""


# 3.1) Hilbert taps are antisymmetric, M=80
def test_designTaps_hilbert_antisymmetric(geometry):
    taps = design_taps(HT, 80, geometry)
    assert taps.M == 80
    np.testing.assert_allclose(taps.weights, -taps.weights[::-1], atol=1e-12)
    assert np.max(np.abs(taps.weights)) == pytest.approx(1.0)


# 3.2) Differentiator taps are antisymmetric
@pytest.mark.parametrize("M", [8, 20, 80, 81])
def test_designTaps_dif_antisymmetric(geometry, M):
    taps = design_taps(DIF, M, geometry)
    np.testing.assert_allclose(taps.weights, -taps.weights[::-1], atol=1e-12)


# 3.3) Integrator taps are all ones
def test_designTaps_int(geometry):
    np.testing.assert_array_equal(design_taps(INT, 20, geometry).weights, np.ones(20))


# 3.4) Phase-encoding taps are the pattern
def test_designTaps_phase_encode(geometry):
    pattern = [1, 1, -1, 1, -1]
    np.testing.assert_array_equal(design_taps(TargetFunction.phase_encode(pattern), 5, geometry).weights, pattern)
    with pytest.raises(ConfigurationError):
        design_taps(TargetFunction.phase_encode(pattern), 6, geometry)


# 3.5) At least two taps
def test_designTaps_single_tap(geometry):
    with pytest.raises(ConfigurationError):
        design_taps(DIF, 1, geometry)


# 3.6) The taps reproduce the sampled causal response at the design frequencies
@pytest.mark.parametrize("M", [20, 80])
def test_frequencySampling_design_points(M):
    weights = frequency_sampling_weights(HT, M)
    omega = design_frequencies(M)
    spectrum = np.fft.fft(weights)
    center = (M - 1) / 2
    # -j*sign(omega) is imaginary at DC, which real taps cannot realize
    inner = omega != 0
    expected = -1j * np.sign(omega[inner]) * np.exp(-1j * omega[inner] * center)
    np.testing.assert_allclose(spectrum[inner], expected, atol=1e-9)


# 3.7) Taps carry the link's tap delay
def test_designTaps_delta_t(geometry):
    assert design_taps(DIF, 8, geometry).delta_t == geometry.delta_t


# 3.8) Differentiator taps reproduce |omega| at every design frequency
@pytest.mark.parametrize("M", [20, 80, 81])
def test_frequencySampling_dif_magnitude(M):
    weights = frequency_sampling_weights(DIF, M)
    omega = design_frequencies(M)
    np.testing.assert_allclose(np.abs(np.fft.fft(weights)), np.abs(ideal_response(DIF, omega)), rtol=1e-9, atol=1e-9)


# 3.9) Mid-band deviation from the ideal magnitude shrinks with the tap number
@pytest.mark.parametrize("func", [DIF, HT], ids=lambda f: f.name)
def test_frequencySampling_midband_deviation(func):
    omega = np.linspace(np.pi / 4, 3 * np.pi / 4, 1001)
    deviations = []
    for M in (20, 40, 80):
        weights = frequency_sampling_weights(func, M)
        response = np.exp(-1j * np.outer(omega, np.arange(M))) @ weights
        deviations.append(np.max(np.abs(np.abs(response) - np.abs(ideal_response(func, omega, M)))))
    assert np.all(np.diff(deviations) < 0)


"""
4] Realized response.
"""


# 4.1) Equal to the DFT of the weights at the design frequencies
def test_realizedResponse_dft(geometry):
    taps = design_taps(DIF, 20, geometry)
    omega_rf = 2 * np.pi * np.arange(20) / 20 / taps.delta_t
    np.testing.assert_allclose(realized_response(taps, omega_rf), np.fft.fft(taps.weights), atol=1e-9)


# 4.2) Per-tap delay offsets add a phase
def test_realizedResponse_extra_delay():
    taps = TapSet([1.0], 1e-11, extra_delays=[2e-12])
    omega = 2 * np.pi * 5e9
    assert realized_response(taps, omega) == pytest.approx(np.exp(-1j * omega * 2e-12))


"""
5] Tap sets.
"""


# 5.1) Delay offsets must match the weights
def test_tapSet_length_mismatch():
    with pytest.raises(ConfigurationError) as excinfo:
        TapSet([1.0, 2.0], 1e-11, extra_delays=[0.0])
    assert "extra_delays" in str(excinfo.value)


# 5.2) Masking keeps a single channel
def test_tapSet_masked():
    taps = TapSet([0.5, -1.0, 0.25], 1e-11)
    np.testing.assert_array_equal(taps.masked(1).weights, [0.0, -1.0, 0.0])
    np.testing.assert_allclose(taps.delays, [0.0, 1e-11, 2e-11])
