"""Training loop and evaluation."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from ..errors import EmptyTrainSet, NumericError, TrainingAborted
from ..graph.vocab import build_vocabulary
from ..model import ModelCheckpoint, ModelConfig, MrnGcn, compute_loss
from ..tensor import OptimizerState, Tape, Tensor, backward, sgd_step
from .dataset import Sample
from .metrics import MetricsReport, report_from_scores

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainingConfig:
    epochs: int = 100
    batch_size: int = 32
    learning_rate: float = 0.002
    momentum: float = 0.0005
    dropout: float = 0.2
    seed: int = 0
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
    threshold: float = 0.5
    pos_weight: Optional[float] = None
    min_frequency: int = 2

    def __post_init__(self):
        if self.epochs <= 0 or self.batch_size <= 0:
            raise ValueError("epochs and batch_size must be positive")
        if self.learning_rate < 0 or self.momentum < 0:
            raise ValueError("learning_rate and momentum must be non-negative")
        if not math.isclose(sum(self.ratios), 1.0, abs_tol=1e-9) or any(r < 0 for r in self.ratios):
            raise ValueError("split ratios must be non-negative and sum to 1")


@dataclass
class EpochLog:
    epoch: int
    train_loss: float
    train_accuracy: float
    val_accuracy: Optional[float]
    val_precision: Optional[float]
    val_recall: Optional[float]
    val_f1: Optional[float]

    def to_json(self) -> dict:
        return dict(self.__dict__)


@dataclass
class TrainResult:
    checkpoint: ModelCheckpoint
    log: list[EpochLog] = field(default_factory=list)
    best_epoch: int = 0


def predict(model: MrnGcn, samples: Sequence[Sample]) -> tuple[np.ndarray, np.ndarray]:
    """Eval-mode probabilities and labels concatenated over all functions."""
    scores, labels = [], []
    for s in samples:
        if s.n_functions:
            scores.append(model.forward(s.mrng).data)
            labels.append(s.labels)
    if not scores:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(scores), np.concatenate(labels)


def evaluate(model: MrnGcn, samples: Sequence[Sample], threshold: float = 0.5) -> MetricsReport:
    scores, labels = predict(model, samples)
    return report_from_scores(scores, labels, threshold)


def _batch_step(model: MrnGcn, batch: Sequence[Sample], cfg: TrainingConfig, state: OptimizerState, seed) -> None:
    params = model.parameters()
    total = sum(s.n_functions for s in batch)
    if total == 0:
        return
    grads = {p: np.zeros_like(p.data) for p in params}
    for k, s in enumerate(batch):
        if not s.n_functions:
            continue
        with Tape() as tape:
            probs = model.forward(s.mrng, train=True, seed=hash_seed(*seed, k))
            loss = compute_loss(probs, s.labels, cfg.pos_weight)
        weight = s.n_functions / total
        for p, g in backward(loss, tape, params).items():
            grads[p] += weight * g
    sgd_step(params, grads, state)


def hash_seed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def _mean_loss(model: MrnGcn, samples: Sequence[Sample], pos_weight) -> tuple[float, np.ndarray, np.ndarray]:
    scores, labels = predict(model, samples)
    if not scores.size:
        return 0.0, scores, labels
    return compute_loss(Tensor(scores), labels, pos_weight).item(), scores, labels


def train_model(
    train: Sequence[Sample],
    validation: Sequence[Sample],
    model_config: Optional[ModelConfig] = None,
    config: Optional[TrainingConfig] = None,
    on_epoch: Optional[Callable[[EpochLog], None]] = None,
) -> TrainResult:
    """Mini-batch SGD over contracts; returns the checkpoint with the best validation F1."""
    config = config or TrainingConfig()
    model_config = replace(model_config or ModelConfig(), dropout=config.dropout, seed=config.seed)
    if not train or not any(s.n_functions for s in train):
        raise EmptyTrainSet("training split has no labeled functions")
    vocab = build_vocabulary([s.mrng for s in train], config.min_frequency)
    model = MrnGcn(model_config, vocab)
    state = OptimizerState(config.learning_rate, config.momentum)
    rng = np.random.default_rng(config.seed)
    history: list[EpochLog] = []
    best: Optional[tuple[float, int, dict[str, np.ndarray]]] = None

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(train))
        try:
            for b, start in enumerate(range(0, len(order), config.batch_size)):
                batch = [train[i] for i in order[start : start + config.batch_size]]
                _batch_step(model, batch, config, state, (config.seed, epoch, b))
            loss, scores, labels = _mean_loss(model, train, config.pos_weight)
        except NumericError as exc:
            raise TrainingAborted(epoch, exc) from exc
        train_acc = report_from_scores(scores, labels, config.threshold).accuracy
        val = evaluate(model, validation, config.threshold) if validation else None
        entry = EpochLog(
            epoch,
            loss,
            train_acc,
            val.accuracy if val else None,
            val.precision if val else None,
            val.recall if val else None,
            val.f1 if val else None,
        )
        history.append(entry)
        log.info("epoch %d loss %.6f train_acc %.4f val_f1 %s", epoch, loss, train_acc, entry.val_f1)
        if on_epoch:
            on_epoch(entry)
        # without validation data the latest epoch wins
        score = val.f1 if val else math.inf
        if best is None or score > best[0] or (val is None):
            best = (score, epoch, {n: p.data.copy() for n, p in model.params.items()})

    _, best_epoch, snapshot = best
    params = {n: Tensor(a, requires_grad=True, name=n) for n, a in snapshot.items()}
    final = MrnGcn(model_config, vocab, params)
    meta = {
        "epoch": best_epoch,
        "best_val_f1": history[best_epoch - 1].val_f1,
        "training": {k: v for k, v in config.__dict__.items()},
        "log": [e.to_json() for e in history],
    }
    return TrainResult(ModelCheckpoint(final, meta), history, best_epoch)
