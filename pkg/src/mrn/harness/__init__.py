"""Datasets, training, evaluation and localization."""

from .locate import exit_code, locate
from .dataset import ManifestEntry, Sample, load_dataset, read_manifest, split_dataset
from .metrics import ConfusionCounts, MetricsReport, report_from_scores, roc_auc
from .synth import generate_corpus
from .train import EpochLog, TrainingConfig, TrainResult, evaluate, predict, train_model

__all__ = [
    "ConfusionCounts",
    "EpochLog",
    "ManifestEntry",
    "MetricsReport",
    "Sample",
    "TrainResult",
    "TrainingConfig",
    "evaluate",
    "exit_code",
    "locate",
    "generate_corpus",
    "load_dataset",
    "predict",
    "read_manifest",
    "report_from_scores",
    "roc_auc",
    "split_dataset",
    "train_model",
]
