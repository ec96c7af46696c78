"""Learning fuzzy cognitive maps from noisy time series."""

from .baselines import PsoConfig, fitness, pso_learn
from .core import ActivationSpec, Family, ResponseSet, WeightMatrix, activate, activate_inverse, simulate, step
from .datagen import NoiseSpec, RandomFcmSpec, add_noise, generate_fcm, generate_initials, generate_responses
from .learner import LearnConfig, NodeSystem, NumericalError, assemble_system, learn, objective, \
    objective_gradient, solve_column
from .metrics import AggregateReport, ConfusionCounts, MetricsReport, aggregate, data_error, model_error, \
    out_of_sample_error, ss_mean

__version__ = "0.1.0"
