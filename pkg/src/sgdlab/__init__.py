"""Desk-scale training laboratory for studying how explicit regularization
lets SGD escape poorly-generalizing initializations."""

from .net import MlpSpec, Weights, Batch, init_weights, forward, predict
from .data import Dataset, GaussianSpec, AdvCorpusConfig
from .optim import LrSchedule, TrainConfig, RunRecord, train
from .advinit import AdvInitResult, make_adversarial_init

__all__ = [
    "MlpSpec", "Weights", "Batch", "init_weights", "forward", "predict",
    "Dataset", "GaussianSpec", "AdvCorpusConfig",
    "LrSchedule", "TrainConfig", "RunRecord", "train",
    "AdvInitResult", "make_adversarial_init",
]
