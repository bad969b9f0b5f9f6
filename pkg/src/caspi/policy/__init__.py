"""Safe-policy-improvement training of the dialogue act policy."""

from .behavior import BehaviorError, BehaviorTable, estimate_behavior
from .evaluate import evaluate_policy, predict_split, write_trace
from .losses import (
    MODES,
    LossError,
    discounted_return,
    kl_divergence,
    loss_det,
    loss_sto,
    sample_weight_update,
    total_loss,
)
from .model import ObsBatch, PolicyError, PolicyModel
from .training import (
    TrainConfig,
    TrainingDiverged,
    subsample_dialogues,
    train_policy,
    turn_samples,
)

__all__ = [
    "BehaviorError",
    "BehaviorTable",
    "MODES",
    "LossError",
    "ObsBatch",
    "PolicyError",
    "PolicyModel",
    "TrainConfig",
    "TrainingDiverged",
    "discounted_return",
    "estimate_behavior",
    "evaluate_policy",
    "kl_divergence",
    "loss_det",
    "loss_sto",
    "predict_split",
    "sample_weight_update",
    "subsample_dialogues",
    "total_loss",
    "train_policy",
    "turn_samples",
    "write_trace",
]
