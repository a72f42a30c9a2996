"""Greedy conditional-influence structure learning for Ising models."""

from .core import (DomainError, Graph, IsingModel, SampleSet, TheoryConstants, compute_constants,
                   required_samples_upper, sample_lower_bound, validate_model)
from .exact import build_joint, exact_conditional_mi, exact_influence, exact_sampler
from .gibbs import GibbsConfig, gibbs_sample
from .estimator import empirical_influence, influence_scan, tabulate
from .learner import LearnConfig, RecoveryReport, learn_graph, learn_neighborhood, mi_increment_audit
from .baselines import BaselineConfig, chow_liu, exhaustive_learn
from .verifier import verify_all

__version__ = "0.1.0"
