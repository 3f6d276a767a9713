from dataclasses import replace

import numpy as np
import pytest

from comb_transversal import ConfigurationError
from comb_transversal.engine import ProcessorSpec, alignment_delay, delay_span, perturbed_taps, synthesize
from comb_transversal.experiments import (
    ACCUMULATION_STAGES,
    Scenario,
    SweepConfig,
    SweepResult,
    SweepRow,
    accumulation_stage,
    apply_parameter,
    evaluate_rmse,
    fade_rows,
    run_fig10,
    run_sweep,
    scenario,
)
from comb_transversal.impairments import ErrorBudget, FloorShape
from comb_transversal.signals import DIF, HT, INT, Grid, TargetFunction, normalize_and_align, reference_output, rmse

from .conftest import FUNCTIONS


@pytest.fixture(scope="module")
def fig4(seeds):
    return run_sweep(scenario("FIG4", seeds=seeds))


@pytest.fixture(scope="module")
def fig10(seeds):
    return run_fig10(seeds=seeds)


"""
1] Accuracy without errors.
"""


# 1.1) Error-free RMSE does not depend on the seed
def test_evaluateRmse_seed_independent(zeroSpec):
    assert evaluate_rmse(zeroSpec) == evaluate_rmse(zeroSpec.with_budget(seed=11))


# 1.2) More taps, better accuracy
def test_fig10_tap_number_ordering(fig10):
    for function in FUNCTIONS:
        p1, p2, p3 = (fig10.median(function, value, "off") for value in (1, 2, 3))
        assert p1 < p3 < p2


# 1.3) The error-free discrete processor is the 80-tap ideal line
def test_fig10_matches_fig3a(fig10, seeds):
    fig3a = run_sweep(scenario("FIG3A", seeds=seeds, functions=(DIF,)))
    assert fig10.select(DIF, 1, "off") == fig3a.select(DIF, 80)


# 1.4) Fast comb noise is scored over the mirror pair of realizations
def test_evaluateRmse_fast_noise(zeroSpec):
    spec = zeroSpec.with_budget(osnr_db=20.0, comb_noise_static=False, seed=3)
    grid = Grid().fitted(*delay_span(spec))
    ideal = reference_output(spec.function, grid)
    errors = []
    for antithetic in (False, True):
        realized = perturbed_taps(spec, antithetic=antithetic)
        output = synthesize(grid.pulse(), realized, spec.geometry, spec.budget)
        actual, reference = normalize_and_align(output, ideal, alignment_delay(spec, realized))
        errors.append(rmse(grid.observe(reference), grid.observe(actual)))
    assert errors[0] != errors[1]
    assert evaluate_rmse(spec) == pytest.approx(np.sqrt(np.mean(np.square(errors))), rel=1e-12)
    # static noise keeps a single realization
    assert evaluate_rmse(spec.with_budget(comb_noise_static=True)) == pytest.approx(errors[0], rel=1e-12)


"""
2] Trends against the error sources.
"""


# 2.1) Comb noise: every function degrades steadily as the OSNR drops
@pytest.mark.parametrize("floor", [FloorShape.FLAT, FloorShape.SINC], ids=lambda f: f.name)
@pytest.mark.parametrize("function", FUNCTIONS, ids=lambda f: f.name)
def test_fig4_monotone(fig4, function, floor):
    medians = fig4.medians(function, floor)
    assert np.all(np.diff(medians) < 0)


# 2.2) Comb noise: most of the improvement comes from the first 10 dB
@pytest.mark.parametrize("function", FUNCTIONS, ids=lambda f: f.name)
def test_fig4_diminishing_returns(fig4, function):
    at = {osnr: fig4.median(function, osnr, FloorShape.FLAT) for osnr in (10.0, 20.0, 40.0)}
    assert at[10.0] > at[20.0]
    assert at[10.0] - at[20.0] > at[20.0] - at[40.0]


# 2.3) Shaping errors: all functions degrade, the differentiator the most
def test_fig8_rtce(seeds):
    result = run_sweep(scenario("FIG8", seeds=seeds))
    increase = {}
    for function in FUNCTIONS:
        medians = result.medians(function)
        assert np.all(np.diff(medians) > 0)
        increase[function] = medians[-1] - medians[0]
    assert increase[DIF] > increase[INT]
    assert increase[DIF] > increase[HT]


# 2.4) Third-order dispersion: all functions degrade, the integrator the most
def test_fig7_tod():
    result = run_sweep(scenario("FIG7", seeds=(0,)))
    increase = {}
    for function in FUNCTIONS:
        medians = result.medians(function)
        assert np.all(np.diff(medians) > 0)
        increase[function] = medians[-1] - medians[0]
    assert increase[INT] > increase[DIF]
    assert increase[INT] > increase[HT]


# 2.5) Chirp (no stochastic source: one seed is enough)
def test_fig5_chirp():
    result = run_sweep(scenario("FIG5", seeds=(0,)))
    for function in FUNCTIONS:
        assert np.all(np.diff(result.medians(function)) > 0)


# 2.6) Dispersion-induced fading at a held tap delay barely depends on D2
def test_fig6_flat():
    result = run_sweep(scenario("FIG6", seeds=(0,)))
    for function in FUNCTIONS:
        without_fade = result.medians(function, False)
        with_fade = result.medians(function, True)
        assert max(without_fade) - min(without_fade) < 1e-12
        assert max(with_fade) - min(with_fade) < 1e-3


# 2.7) Fade companion table
def test_fadeRows():
    rows = fade_rows(scenario("FIG6", seeds=(0,)))
    assert rows[0] == ["d2", "fade_db"]
    assert len(rows) == 7
    fades = [float(r[1]) for r in rows[1:]]
    assert np.all(np.diff(fades) < 0)
    with pytest.raises(ConfigurationError):
        fade_rows(scenario("FIG8", seeds=(0,)))


# 2.8) Accumulated error sources
@pytest.mark.parametrize("function", FUNCTIONS, ids=lambda f: f.name)
def test_fig9_accumulation(seeds, function):
    result = run_sweep(scenario("FIG9", seeds=seeds, functions=(function,)))
    medians = result.medians(function)
    assert len(medians) == len(ACCUMULATION_STAGES)
    assert np.all(np.diff(medians) >= 0)
    assert medians[-1] > medians[0]
    assert medians[1] > medians[0]


# 2.9) Chirp is a main error source of the differentiator
def test_fig9_dif_chirp(seeds):
    result = run_sweep(scenario("FIG9", seeds=seeds, functions=(DIF,), values=(1, 2)))
    first, second = result.medians(DIF)
    assert second > first


# 2.10) The error budgets of the three processors
def test_fig10_budget_on(fig10):
    for function in FUNCTIONS:
        for processor in (1, 2, 3):
            assert fig10.median(function, processor, "on") > fig10.median(function, processor, "off")


# 2.11) Limited tap number alone
def test_fig3a_tap_number():
    result = run_sweep(scenario("FIG3A", seeds=(0,)))
    for function in FUNCTIONS:
        assert np.all(np.diff(result.medians(function)) < 0)


"""
3] Sweep bookkeeping.
"""


# 3.1) Rows in deterministic order, header with the series column
def test_runSweep_rows(fig4, seeds):
    rows = fig4.to_csv_rows()
    assert rows[0] == ["function", "osnr_db", "floor", "seed", "rmse"]
    assert len(rows) == 1 + 3 * 2 * 6 * len(seeds)
    assert rows[1][:4] == ["DIF", "10.0", "FLAT", "0"]
    assert rows[-1][:3] == ["HT", "40.0", "SINC"]


# 3.2) Reruns and worker pools give identical results
def test_runSweep_deterministic():
    cfg = scenario("CUSTOM", seeds=(0, 1), functions=(DIF, HT), parameter="rtce_range", values=(0.0, 0.05))
    first = run_sweep(cfg).to_csv_rows()
    assert run_sweep(cfg).to_csv_rows() == first
    assert run_sweep(replace(cfg, workers=2)).to_csv_rows() == first


# 3.3) Median, min and max per point
def test_sweepResult_aggregates():
    rows = [SweepRow("DIF", 20, None, seed, value) for seed, value in enumerate([0.3, 0.1, 0.2])]
    result = SweepResult("M", rows)
    assert result.aggregates()[("DIF", None, 20)] == {"median": 0.2, "min": 0.1, "max": 0.3}
    assert result.median("DIF", 20) == 0.2
    assert result.header() == ["function", "M", "seed", "rmse"]


# 3.4) Data frame export
def test_sweepResult_dataframe():
    pytest.importorskip("pandas")
    result = SweepResult("alpha", [SweepRow("INT", 0.5, None, 0, 0.01)])
    frame = result.to_dataframe()
    assert list(frame.columns) == ["function", "alpha", "seed", "rmse"]
    assert frame["rmse"].iloc[0] == 0.01


"""
4] Sweep configuration.
"""


# 4.1) Invalid sweeps
@pytest.mark.parametrize(
    "kwargs, message",
    [
        ({"parameter": "colour", "values": (1,)}, "sweep.parameter"),
        ({"parameter": "M", "values": ()}, "sweep.values"),
        ({"parameter": "M", "values": (80, 20)}, "sorted"),
        ({"parameter": "M", "values": (20,), "seeds": ()}, "sweep.seeds"),
        ({"parameter": "M", "values": (20,), "series_values": (1,)}, "without sweep.series"),
        ({"parameter": "M", "values": (20,), "workers": 0}, "sweep.workers"),
        ({"parameter": "M", "values": (8,), "functions": (TargetFunction.phase_encode([1] * 8),)}, "PHASE_ENCODE"),
    ],
)
def test_sweepConfig_invalid(kwargs, message):
    with pytest.raises(ConfigurationError) as excinfo:
        SweepConfig(scenario="CUSTOM", base=ProcessorSpec(), **kwargs)
    assert message in str(excinfo.value)


# 4.2) Scenario names
def test_scenario_parse():
    assert Scenario.parse("fig12b") is Scenario.FIG12B
    with pytest.raises(ConfigurationError):
        Scenario.parse("FIG11")
    with pytest.raises(ConfigurationError):
        scenario("CUSTOM")


# 4.3) Calibration scenario
def test_scenario_fig12b():
    cfg = scenario("FIG12B", seeds=(0,))
    assert cfg.series == "calibration"
    assert cfg.series_values == ("theoretical", "before", "after")
    assert cfg.calibration.phase_correction


# 4.4) Accumulation stages are cumulative
def test_accumulationStage(zeroSpec):
    assert accumulation_stage(zeroSpec, 0).budget == ErrorBudget.zero()
    first = accumulation_stage(zeroSpec, 1).budget
    assert first.osnr_db == 30.0 and not first.comb_noise_static
    assert accumulation_stage(zeroSpec, 2).budget.alpha == 0.5
    last = accumulation_stage(zeroSpec, len(ACCUMULATION_STAGES) - 1)
    assert last.budget.tod_enabled and last.budget.sod_fade_enabled and last.budget.rtce_range == 0.05
    assert last.geometry.d3 == 0.083
    with pytest.raises(ConfigurationError):
        accumulation_stage(zeroSpec, len(ACCUMULATION_STAGES))


# 4.5) Setting spec fields
def test_applyParameter(zeroSpec):
    assert apply_parameter(zeroSpec, "M", 20).M == 20
    assert apply_parameter(zeroSpec, "d2", 5.0).geometry.d2 == 5.0
    assert apply_parameter(zeroSpec, "osnr_db", 30.0).budget.osnr_db == 30.0
    assert apply_parameter(zeroSpec, "processor", 2).M == 8
    with pytest.raises(ConfigurationError):
        apply_parameter(zeroSpec, "budget", "maybe")
