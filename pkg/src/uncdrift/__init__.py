"""Streaming concept-drift detection driven by predictive uncertainty.

A small numpy classifier is trained on the head of a stream; each later
sample is scored by one of five uncertainty estimators, and the Shannon
entropy of the prediction feeds an ADWIN detector that triggers retraining.
"""

from .adwin import Adwin, DriftVerdict
from .errors import ConfigurationError, InputError, ShapeError, StateError
from .harness import (
    DatasetStream,
    ExperimentConfig,
    RunResult,
    equal_positions,
    load_stream,
    random_positions,
    run_baseline,
    run_detection,
    run_experiment,
    run_fixed_positions,
    split_initial,
    sweep,
)
from .metrics import CalibrationBins, ConfusionMatrix, aggregate_seeds, ece, mcc, reliability_export
from .nn import ArchitectureSpec, ModelParams, TrainingSet, train
from .uncertainty import (
    AshConfig,
    Estimator,
    EstimatorConfig,
    SwagPosterior,
    ash_prune,
    bma_average,
    shannon_entropy,
)

__version__ = "0.1.0"
