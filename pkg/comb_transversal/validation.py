"""
SciUnit adapter: a transversal processor as a ``sciunit.Model`` and its processing
accuracy as a ``sciunit.Test`` scored by the RMSE against the ideal output.

Needs the ``validation`` extra::

    >>> from comb_transversal import preset
    >>> from comb_transversal.signals import HT
    >>> from comb_transversal.validation import ProcessorModel, ProcessingAccuracyTest
    >>> test = ProcessingAccuracyTest.for_function("HT")
    >>> score = test.judge(ProcessorModel(preset("PROCESSOR_1", function=HT)))
"""

try:
    import sciunit
    from sciunit import Capability, Model, Score, Test
    from sciunit.errors import ObservationError
except ImportError:
    print("Please install the following package: sciunit")
    raise

from .engine import ProcessorSpec, alignment_delay, perturbed_taps, synthesize
from .signals import Grid, TargetFunction, Waveform, delay_waveform, normalize_and_align, reference_output, rmse


class ProducesProcessedWaveform(Capability):
    """The model processes an input waveform and returns the output with its latency removed."""

    def process(self, input: Waveform) -> Waveform:
        raise NotImplementedError()


class RMSEScore(Score):
    """Root mean square error between peak-normalized waveforms (lower is better)."""

    _description = "RMSE of the processed waveform against the ideal output"

    @classmethod
    def compute(cls, observation: Waveform, prediction: Waveform, grid: Grid):
        actual, reference = normalize_and_align(prediction, observation, 0.0)
        return RMSEScore(rmse(grid.observe(reference), grid.observe(actual)))

    @property
    def norm_score(self):
        return 1.0 / (1.0 + self.score)

    def __str__(self):
        return f"RMSE = {self.score:.4g}"


class ProcessorModel(Model, ProducesProcessedWaveform):
    """A simulated processor."""

    def __init__(self, spec: ProcessorSpec, name=None, draw=None):
        sciunit.Model.__init__(self, name=name or f"{spec.function.name} processor, M={spec.M}")
        self.spec = spec
        self.draw = draw

    def process(self, input: Waveform) -> Waveform:
        realized = perturbed_taps(self.spec, draw=self.draw)
        output = synthesize(input, realized, self.spec.geometry, self.spec.budget)
        return delay_waveform(output, -alignment_delay(self.spec, realized))


class ProcessingAccuracyTest(Test):
    """Accuracy of a processor on the Gaussian test pulse.

    The observation is a mapping with the ``input`` waveform and the ``ideal`` output.
    """

    score_type = RMSEScore
    required_capabilities = (ProducesProcessedWaveform,)

    def __init__(self, observation, name="Processing accuracy", grid=None):
        self.grid = grid or Grid()
        sciunit.Test.__init__(self, observation, name)

    @classmethod
    def for_function(cls, function, grid=None):
        """Test against the analytic ideal output of a processing function."""
        grid = grid or Grid()
        function = TargetFunction.from_name(function)
        observation = {"input": grid.pulse(), "ideal": reference_output(function, grid)}
        return cls(observation, name=f"{function.name} accuracy", grid=grid)

    def validate_observation(self, observation):
        if not isinstance(observation, dict) or set(observation) != {"input", "ideal"}:
            raise ObservationError("Observation must contain exactly 'input' and 'ideal' waveforms")
        if not observation["input"].same_grid(observation["ideal"]):
            raise ObservationError("'input' and 'ideal' must share one grid")
        return observation

    def generate_prediction(self, model, verbose=False):
        return model.process(self.observation["input"])

    def compute_score(self, observation, prediction, verbose=False):
        return RMSEScore.compute(observation["ideal"], prediction, self.grid)
