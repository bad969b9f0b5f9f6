"""Dialogue evaluation and training metrics."""

from .bleu import BleuError, corpus_bleu
from .metrics import (
    ACTION_FORMS,
    SUCCESS_MODES,
    MetricConfig,
    MetricScore,
    MetricsError,
    PredictedDialogue,
    combined_score,
    dialogue_inform,
    dialogue_success,
    evaluate_predictions,
    inform_rate,
    report_dict,
    score_dialogue,
    success_rate,
    training_metric,
    write_report,
)

__all__ = [
    "ACTION_FORMS",
    "BleuError",
    "MetricConfig",
    "MetricScore",
    "MetricsError",
    "PredictedDialogue",
    "SUCCESS_MODES",
    "combined_score",
    "corpus_bleu",
    "dialogue_inform",
    "dialogue_success",
    "evaluate_predictions",
    "inform_rate",
    "report_dict",
    "score_dialogue",
    "success_rate",
    "training_metric",
    "write_report",
]
