import pytest

sciunit = pytest.importorskip("sciunit")

from sciunit.errors import ObservationError  # noqa: E402

from comb_transversal.engine import ProcessorSpec, preset  # noqa: E402
from comb_transversal.experiments import evaluate_rmse  # noqa: E402
from comb_transversal.impairments import ErrorBudget  # noqa: E402
from comb_transversal.signals import HT  # noqa: E402
from comb_transversal.validation import ProcessingAccuracyTest, ProcessorModel, RMSEScore  # noqa: E402

"""
1] Processors judged by the processing accuracy test.
"""


# 1.1) The score is the RMSE against the ideal output
def test_judge_rmse(grid):
    spec = ProcessorSpec(M=20, function=HT, budget=ErrorBudget.zero())
    score = ProcessingAccuracyTest.for_function("HT", grid).judge(ProcessorModel(spec))
    assert isinstance(score, RMSEScore)
    assert score.score == pytest.approx(evaluate_rmse(spec, grid), rel=1e-12)
    assert 0 < score.norm_score <= 1


# 1.2) Errors lower the score
def test_judge_preset(grid):
    test = ProcessingAccuracyTest.for_function("HT", grid)
    ideal = test.judge(ProcessorModel(preset("PROCESSOR_1", function=HT).without_errors()))
    real = test.judge(ProcessorModel(preset("PROCESSOR_1", function=HT), name="discrete"))
    assert real.score > ideal.score
    assert str(real).startswith("RMSE = ")


# 1.3) Observation must hold the input and the ideal output
def test_validateObservation(pulse):
    test = ProcessingAccuracyTest.for_function("DIF")
    with pytest.raises(ObservationError):
        test.validate_observation({"input": pulse})
