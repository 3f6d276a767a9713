import pytest

from comb_transversal import ConfigurationError
from comb_transversal.config import apply_overrides, parse_config, parse_spec, spec_to_dict
from comb_transversal.engine import ProcessorSpec, preset
from comb_transversal.experiments import Scenario
from comb_transversal.signals import FunctionKind, Grid

"""
1] Unknown and invalid keys.
"""


# 1.1) Unknown keys are named, with their section
@pytest.mark.parametrize(
    "data, key",
    [
        ({"colour": 1}, "'colour'"),
        ({"budget": {"osnr": 20}}, "'budget.osnr'"),
        ({"geometry": {"length": 4.8}}, "'geometry.length'"),
        ({"sweep": {"step": 1}}, "'sweep.step'"),
        ({"grid": {"points": 10}}, "'grid.points'"),
    ],
)
def test_parseConfig_unknown_key(data, key):
    with pytest.raises(ConfigurationError) as excinfo:
        parse_config(data)
    assert str(excinfo.value) == f"Unknown configuration key {key}"


# 1.2) Out-of-range values
@pytest.mark.parametrize(
    "data",
    [{"M": 1}, {"budget": {"rtce_range": 2}}, {"calibration": {"damping": 2}}, {"geometry": {"length_L": "abc"}}],
)
def test_parseConfig_invalid_value(data):
    with pytest.raises(ConfigurationError):
        parse_config(data)


# 1.3) Unknown function
def test_parseSpec_unknown_function():
    with pytest.raises(ConfigurationError) as excinfo:
        parse_spec({"function": "fourier"})
    assert "function" in str(excinfo.value)


"""
2] Processor spec.
"""


# 2.1) Defaults
def test_parseSpec_defaults():
    assert parse_spec({}) == ProcessorSpec()


# 2.2) Infinite OSNR written as a string
def test_parseSpec_infinite_osnr():
    assert parse_spec({"budget": {"osnr_db": "inf"}}).budget.osnr_db == float("inf")
    with pytest.raises(ConfigurationError):
        parse_spec({"budget": {"osnr_db": "loud"}})


# 2.3) A preset written out reads back as the same spec
def test_specToDict_preset():
    spec = preset("PROCESSOR_2", seed=12)
    data = spec_to_dict(spec)
    assert data["budget"]["floor_shape"] == "FLAT"
    assert "tap_delay" not in data["geometry"]
    assert parse_spec(data) == spec


# 2.4) Phase-encoding patterns
def test_parseSpec_phase_encode():
    spec = parse_spec({"M": 4, "function": {"PHASE_ENCODE": [1, -1, -1, 1]}})
    assert spec.function.kind is FunctionKind.PHASE_ENCODE


"""
3] Overrides.
"""


# 3.1) Dotted keys, JSON values, strings otherwise
def test_applyOverrides():
    data = apply_overrides({"budget": {"seed": 1}}, ["budget.alpha=0.5", "function=hilbert", "M=20"])
    assert data == {"budget": {"seed": 1, "alpha": 0.5}, "function": "hilbert", "M": 20}


# 3.2) The input mapping is not modified
def test_applyOverrides_copy():
    original = {"budget": {"alpha": 0.1}}
    apply_overrides(original, ["budget.alpha=0.2"])
    assert original == {"budget": {"alpha": 0.1}}


# 3.3) Malformed overrides
@pytest.mark.parametrize("override", ["alpha", "=1", "M.x=1"])
def test_applyOverrides_invalid(override):
    with pytest.raises(ConfigurationError):
        apply_overrides({"M": 80}, [override])


"""
4] Sweeps from a configuration.
"""


# 4.1) A named scenario keeps its own base spec
def test_sweepConfig_named():
    cfg = parse_config({"sweep": {"scenario": "FIG8"}}).sweep_config(seeds=(0,))
    assert cfg.scenario is Scenario.FIG8
    assert cfg.parameter == "rtce_range"
    assert not cfg.base.budget.sod_fade_enabled


# 4.2) A custom sweep over the configured spec
def test_sweepConfig_custom():
    run = parse_config({"M": 20, "grid": {"count": 16384}, "sweep": {"parameter": "alpha", "values": [0, 0.5]}})
    cfg = run.sweep_config(output="out.csv")
    assert cfg.scenario is Scenario.CUSTOM
    assert cfg.base.M == 20
    assert cfg.grid == Grid(count=16384)
    assert cfg.output == "out.csv"


# 4.3) The calibration scenario keeps its phase correction unless configured
def test_sweepConfig_calibration():
    assert parse_config({}).sweep_config("FIG12B").calibration.phase_correction
    run = parse_config({"calibration": {"phase_correction": False}})
    assert not run.sweep_config("FIG12B").calibration.phase_correction
