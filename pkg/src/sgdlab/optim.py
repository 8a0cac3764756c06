"""SGD training loop with piecewise-constant schedules and the three
independently toggleable heuristics: momentum, l2 penalty, data augmentation."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, augment_crop_flip, augment_gaussian_replicate
from .errors import ContractError, DivergedError
from .net import (Batch, MlpSpec, Weights, PROVENANCE_TRAINED,
                  _check_forward_args, _forward_cached, _loss_and_grads_core,
                  loss_and_grads, predict, zeros_like_layers)

STOP_FULL_TRAIN_ACC = "full-train-acc"
STOP_PLATEAU = "plateau"
STOP_MAX_EPOCHS = "max-epochs"


@dataclass(frozen=True)
class LrSchedule:
    segments: tuple[tuple[int, float], ...]

    def __post_init__(self):
        segs = tuple((int(e), float(lr)) for e, lr in self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs or segs[0][0] != 1:
            raise ContractError("schedule must start at epoch 1")
        epochs = [e for e, _ in segs]
        if any(b <= a for a, b in zip(epochs, epochs[1:])):
            raise ContractError("segment start epochs must be strictly increasing")
        if any(lr <= 0 for _, lr in segs):
            raise ContractError("learning rates must be positive")


def lr_at(schedule: LrSchedule, epoch: int) -> float:
    if epoch < 1:
        raise ContractError(f"epoch must be >= 1, got {epoch}")
    lr = schedule.segments[0][1]
    for start, seg_lr in schedule.segments:
        if start <= epoch:
            lr = seg_lr
        else:
            break
    return lr


@dataclass(frozen=True)
class GaussianReplicate:
    copies: int = 2
    sigma: float = 0.15


@dataclass(frozen=True)
class CropFlip:
    pad: int = 4


Augmentation = GaussianReplicate | CropFlip | None


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int
    schedule: LrSchedule
    momentum: float = 0.0
    l2: float = 0.0
    augmentation: Augmentation = None
    max_epochs: int = 1000
    stop_at_full_train_acc: bool = True
    plateau_window: int = 20
    plateau_min_delta: float = 0.001
    # Held-out accuracy is recorded every this many epochs (and always on the
    # final epoch). Train accuracy drives stopping, so it is always per-epoch.
    test_eval_every: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.test_eval_every < 1:
            raise ContractError("test_eval_every must be >= 1")
        if self.batch_size < 1:
            raise ContractError("batch_size must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise ContractError("momentum must lie in [0, 1)")
        if self.l2 < 0:
            raise ContractError("l2 must be nonnegative")
        if self.max_epochs < 1:
            raise ContractError("max_epochs must be positive")
        if self.plateau_window < 1:
            raise ContractError("plateau window must be >= 1")

    def is_vanilla(self) -> bool:
        return self.momentum == 0.0 and self.l2 == 0.0 and self.augmentation is None

    def fingerprint(self) -> str:
        doc = {
            "batch_size": self.batch_size,
            "schedule": list(self.schedule.segments),
            "momentum": self.momentum,
            "l2": self.l2,
            "augmentation": repr(self.augmentation),
            "max_epochs": self.max_epochs,
            "stop_at_full_train_acc": self.stop_at_full_train_acc,
            "plateau": [self.plateau_window, self.plateau_min_delta],
            "test_eval_every": self.test_eval_every,
            "seed": self.seed,
        }
        return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class EpochStats:
    epoch: int
    lr: float
    train_loss: float
    train_acc: float
    test_acc: float | None = None


@dataclass
class RunRecord:
    epochs: list[EpochStats] = field(default_factory=list)
    final_weights: Weights | None = None
    stopped_reason: str = ""
    config_fingerprint: str = ""

    @property
    def final_train_acc(self) -> float:
        return self.epochs[-1].train_acc

    @property
    def final_test_acc(self) -> float | None:
        return self.epochs[-1].test_acc


def _epoch_rng(seed: int, epoch: int) -> np.random.Generator:
    return np.random.default_rng([seed, epoch])


def accuracy(spec: MlpSpec, w: Weights, ds: Dataset) -> float:
    return float(np.mean(predict(spec, w, ds.features) == ds.labels))


def _accuracy_fast(w: Weights, ds: Dataset) -> float:
    """accuracy() without re-validating features already checked this run."""
    logits, _, _ = _forward_cached(None, w, ds.features)
    return float(np.mean(np.argmax(logits, axis=1) == ds.labels))


def sgd_epoch(spec: MlpSpec, w: Weights, v, data: Dataset, cfg: TrainConfig,
              epoch: int, rng: np.random.Generator):
    """One pass over the shuffled data; returns (weights, velocity, mean loss).

    Mutates w and v in place. The last partial batch is kept. Crop-flip
    augmentation is sampled freshly per batch; gaussian-replicate is a
    dataset-level transform handled by train()."""
    lr = lr_at(cfg.schedule, epoch)
    # Validate the epoch's data against the architecture once; batches below
    # are slices of it and use the unchecked gradient core.
    features = _check_forward_args(spec, w, data.features)
    if np.any(data.labels < 0) or np.any(data.labels >= spec.n_classes):
        raise ContractError("labels out of range")
    order = rng.permutation(data.n)
    losses = []
    for start in range(0, data.n, cfg.batch_size):
        idx = order[start:start + cfg.batch_size]
        batch = Batch(features[idx], data.labels[idx])
        if isinstance(cfg.augmentation, CropFlip):
            if data.kind != "image":
                raise ContractError("crop-flip augmentation needs an image dataset")
            batch = augment_crop_flip(batch, data.image_dims, cfg.augmentation.pad, rng)
        loss, grads = _loss_and_grads_core(w, batch.features, batch.labels, cfg.l2)
        if not np.isfinite(loss):
            raise DivergedError(f"non-finite loss at epoch {epoch}")
        losses.append(loss)
        if cfg.momentum == 0.0:
            for (m, b), (gm, gb) in zip(w.layers, grads):
                m -= lr * gm
                b -= lr * gb
        else:
            for (m, b), (gm, gb), (vm, vb) in zip(w.layers, grads, v):
                vm *= cfg.momentum
                vm += gm
                vb *= cfg.momentum
                vb += gb
                m -= lr * vm
                b -= lr * vb
    return w, v, float(np.mean(losses))


def train(train_set: Dataset, test_set: Dataset | None, spec: MlpSpec,
          init: Weights, cfg: TrainConfig) -> RunRecord:
    """Run sgd_epoch until full train accuracy, plateau, or max_epochs."""
    if train_set.dim != spec.input_dim:
        raise ContractError("training set dimension does not match the architecture")
    data = train_set
    if isinstance(cfg.augmentation, GaussianReplicate):
        data = augment_gaussian_replicate(train_set, cfg.augmentation.copies,
                                          cfg.augmentation.sigma, cfg.seed)
    if cfg.batch_size > data.n:
        raise ContractError("batch_size exceeds the (augmented) training-set size")

    w = init.copy()
    if test_set is not None:
        _check_forward_args(spec, w, test_set.features)
    v = zeros_like_layers(w)
    record = RunRecord(config_fingerprint=cfg.fingerprint())
    best_acc = -1.0
    stale = 0
    for epoch in range(1, cfg.max_epochs + 1):
        rng = _epoch_rng(cfg.seed, epoch)
        try:
            w, v, mean_loss = sgd_epoch(spec, w, v, data, cfg, epoch, rng)
        except DivergedError as e:
            e.record_prefix = record
            raise
        if not all(np.all(np.isfinite(m)) and np.all(np.isfinite(b)) for m, b in w.layers):
            raise DivergedError(f"non-finite weights at epoch {epoch}", record)
        train_acc = _accuracy_fast(w, data)
        test_acc = None
        if test_set is not None and epoch % cfg.test_eval_every == 0:
            test_acc = _accuracy_fast(w, test_set)
        record.epochs.append(EpochStats(epoch, lr_at(cfg.schedule, epoch),
                                        mean_loss, train_acc, test_acc))
        if cfg.stop_at_full_train_acc and train_acc == 1.0:
            record.stopped_reason = STOP_FULL_TRAIN_ACC
            break
        if train_acc >= best_acc + cfg.plateau_min_delta:
            best_acc = train_acc
            stale = 0
        else:
            stale += 1
            if stale >= cfg.plateau_window:
                record.stopped_reason = STOP_PLATEAU
                break
    else:
        record.stopped_reason = STOP_MAX_EPOCHS

    if test_set is not None and record.epochs and record.epochs[-1].test_acc is None:
        record.epochs[-1].test_acc = _accuracy_fast(w, test_set)
    w.provenance = PROVENANCE_TRAINED
    record.final_weights = w
    return record
