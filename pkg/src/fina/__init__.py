"""Fairness-in-adverse-effects decision engine and smart-home simulation harness."""

from .core import (AdverseHistory, CandidateSet, Decision, FinaParams, PreferenceProfile,
                   adverse_effect, adverse_effect_vector, baseline_mean, baseline_round_robin,
                   baseline_weighted, history_accumulate, select_approach1, select_approach2,
                   select_approach3, select_approach4, select_approach5)
from .metrics import Histogram, cov, fairness_index, histogram_overlap, jsd, satisfaction_rate

__version__ = "0.1.0"
