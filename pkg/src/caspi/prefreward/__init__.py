"""Pairwise causal reward learning: folds, harvesting, training, annotation."""

from .dp import HumanPair, ScoredRollout, load_dp, write_dp
from .folds import Fold, FoldError, FoldSpec, kfold_split
from .harvest import HarvestResult, harvest
from .model import PHI_CHOICES, RewardModel, RewardModelError, TurnBatch
from .training import (
    RewardTrainConfig,
    RewardTrainLog,
    RewardTrainingError,
    annotate_corpus,
    mu_target,
    pair_loss,
    preference_prob,
    ranking_accuracy,
    rollout_rows,
    train_reward,
)

__all__ = [
    "Fold",
    "FoldError",
    "FoldSpec",
    "HarvestResult",
    "HumanPair",
    "PHI_CHOICES",
    "RewardModel",
    "RewardModelError",
    "RewardTrainConfig",
    "RewardTrainLog",
    "RewardTrainingError",
    "ScoredRollout",
    "TurnBatch",
    "annotate_corpus",
    "harvest",
    "kfold_split",
    "load_dp",
    "mu_target",
    "pair_loss",
    "preference_prob",
    "ranking_accuracy",
    "rollout_rows",
    "train_reward",
    "write_dp",
]
