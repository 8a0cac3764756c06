"""Adversarial initializer: pretrain on a randomly-labeled, corrupted copy of
the training features, starting from a random init, with vanilla SGD."""

from __future__ import annotations

from dataclasses import dataclass

from .data import AdvCorpusConfig, Dataset, build_adversarial_corpus
from .errors import ContractError
from .net import MlpSpec, Weights, PROVENANCE_ADVERSARIAL, init_weights
from .optim import RunRecord, TrainConfig, accuracy, train


@dataclass
class AdvInitResult:
    weights: Weights
    corpus_train_acc: float
    pretrain_record: RunRecord
    corpus_cfg: AdvCorpusConfig
    train_cfg: TrainConfig


def make_adversarial_init(ds: Dataset, spec: MlpSpec, corpus_cfg: AdvCorpusConfig,
                          train_cfg: TrainConfig, seed: int) -> AdvInitResult:
    """Only the features of ds are used; its labels never influence the result."""
    if not train_cfg.is_vanilla():
        raise ContractError(
            "adversarial pretraining must use vanilla SGD "
            "(momentum=0, l2=0, no augmentation)")
    corpus = build_adversarial_corpus(ds, corpus_cfg)
    record = train(corpus, None, spec, init_weights(spec, seed), train_cfg)
    weights = record.final_weights.copy()
    weights.provenance = PROVENANCE_ADVERSARIAL
    weights.seed = seed
    return AdvInitResult(
        weights=weights,
        corpus_train_acc=accuracy(spec, weights, corpus),
        pretrain_record=record,
        corpus_cfg=corpus_cfg,
        train_cfg=train_cfg,
    )
