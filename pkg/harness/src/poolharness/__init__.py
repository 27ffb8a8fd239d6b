"""Trains populations of small classifiers under training-data mutations and
writes instance-pool CSVs (``instance_id,seed,metric[,o_0,...]``)."""

from poolharness.mutations import delete_training_data, change_labels, parse_mutation
from poolharness.train import DatasetUnavailable, HarnessConfig, train_pool

__version__ = "0.1.0"

__all__ = [
    "DatasetUnavailable",
    "HarnessConfig",
    "change_labels",
    "delete_training_data",
    "parse_mutation",
    "train_pool",
]
