from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .config import ExperimentConfig, load_config, parse_config, toy_train_config
from .results import ResultsTable, emit_results

__all__ = [
    "Checkpoint", "load_checkpoint", "save_checkpoint",
    "ExperimentConfig", "load_config", "parse_config", "toy_train_config",
    "ResultsTable", "emit_results",
]
