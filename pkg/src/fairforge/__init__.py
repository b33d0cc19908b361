"""Fairness-regularized training engine and multi-stakeholder negotiation tool.

Trains binary classifiers under weighted combinations of eight ratio-based
fairness metrics, traces fairness-accuracy and fairness-fairness trade-off
frontiers, and serves the results to an interactive negotiation UI.
"""

__version__ = "0.1.0"

from fairforge.data import DatasetSchema, TabularDataset, class_distribution, load_dataset
from fairforge.fairrisk import FairRiskModel, MatchedPairs, fit_fair_risk, match_pairs, parity_shift
from fairforge.metrics import METRIC_IDS, MetricSpec, MetricValue, compute_metric
from fairforge.training import TrainConfig, TrainTrace, train

__all__ = [
    "DatasetSchema",
    "TabularDataset",
    "load_dataset",
    "class_distribution",
    "FairRiskModel",
    "MatchedPairs",
    "fit_fair_risk",
    "parity_shift",
    "match_pairs",
    "MetricSpec",
    "MetricValue",
    "METRIC_IDS",
    "compute_metric",
    "TrainConfig",
    "TrainTrace",
    "train",
]
