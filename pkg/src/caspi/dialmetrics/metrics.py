"""Dialogue-level evaluation: inform, success (hard/soft), the per-dialogue
training metric, and the combined evaluation score.

Internal scale is [0, 1] everywhere; percent appears only at the reporting
boundary.
"""

import json
from dataclasses import dataclass, field

from caspi.toywoz import Rollout, Turn, evaluate_outcome

from .bleu import corpus_bleu

SUCCESS_MODES = ("hard", "soft")
ACTION_FORMS = ("act", "resp")


class MetricsError(Exception):
    pass


@dataclass
class MetricConfig:
    lam: float = 2.0  # BLEU weight in the per-dialogue training metric
    success_mode: str = "soft"
    action_form: str = "act"

    def __post_init__(self):
        if not (self.lam >= 0 and self.lam == self.lam):
            raise MetricsError(f"lambda must be finite and >= 0, got {self.lam}")
        if self.success_mode not in SUCCESS_MODES:
            raise MetricsError(f"success mode must be one of {SUCCESS_MODES}")
        if self.action_form not in ACTION_FORMS:
            raise MetricsError(f"action form must be one of {ACTION_FORMS}")


@dataclass
class MetricScore:
    inform: float
    success: float
    bleu: float
    lam: float
    success_mode: str

    @property
    def training_metric(self) -> float:
        return self.inform + self.success + self.lam * self.bleu

    @property
    def combined(self) -> float:
        return combined_score(self.inform * 100, self.success * 100, self.bleu * 100)


@dataclass
class PredictedDialogue:
    """Acts and responses predicted per turn, conditioned on reference
    observations of one corpus dialogue."""

    dialogue_id: str
    acts: list[tuple[str, ...]]
    responses: list[list[str]] = field(default_factory=list)


def combined_score(inform_pct: float, success_pct: float, bleu_pct: float) -> float:
    return (inform_pct + success_pct) * 0.5 + bleu_pct


def dialogue_success(goal, outcome, mode: str) -> float:
    requested = goal.requested_pairs()
    if not requested:
        return 1.0
    answered = {tuple(x.split(":", 1)) for x in outcome["answered"]}
    answered &= requested
    if mode == "hard":
        return 1.0 if answered == requested else 0.0
    return len(answered) / len(requested)


def dialogue_inform(outcome) -> float:
    return 1.0 if outcome["entity_offered"] else 0.0


def inform_rate(rollouts) -> float:
    rollouts = list(rollouts)
    if not rollouts:
        raise MetricsError("empty rollout set")
    return sum(dialogue_inform(r.outcome) for r in rollouts) / len(rollouts)


def success_rate(rollouts, mode: str) -> float:
    if mode not in SUCCESS_MODES:
        raise MetricsError(f"success mode must be one of {SUCCESS_MODES}")
    rollouts = list(rollouts)
    if not rollouts:
        raise MetricsError("empty rollout set")
    return sum(dialogue_success(r.goal, r.outcome, mode) for r in rollouts) / len(
        rollouts
    )


def _predicted_rollout(pred: PredictedDialogue, reference: Rollout) -> Rollout:
    """Predicted acts grafted onto reference observations."""
    if len(pred.acts) != len(reference.turns):
        raise MetricsError(
            f"dialogue {pred.dialogue_id}: {len(pred.acts)} predicted turns vs "
            f"{len(reference.turns)} reference turns"
        )
    turns = [
        Turn(
            belief=ref_turn.belief,
            user_tokens=ref_turn.user_tokens,
            act_tokens=tuple(act),
            resp_tokens=list(pred.responses[i]) if pred.responses else [],
            planted_reward=0.0,
        )
        for i, (act, ref_turn) in enumerate(zip(pred.acts, reference.turns))
    ]
    return Rollout(
        dialogue_id=pred.dialogue_id,
        split=reference.split,
        goal=reference.goal,
        turns=turns,
    )


def _bleu_pairs(pred: PredictedDialogue, reference: Rollout, action_form: str):
    if action_form == "act":
        hyps = [list(a) for a in pred.acts]
        refs = [list(t.act_tokens) for t in reference.turns]
    else:
        hyps = [list(r) for r in pred.responses]
        refs = [list(t.resp_tokens) for t in reference.turns]
    return hyps, refs


def score_dialogue(
    pred: PredictedDialogue, reference: Rollout, schemas, config: MetricConfig
) -> MetricScore:
    """Per-dialogue score: inform and success on this dialogue alone, BLEU
    over its turns under the configured action form."""
    rolled = _predicted_rollout(pred, reference)
    outcome = evaluate_outcome(rolled, schemas)
    hyps, refs = _bleu_pairs(pred, reference, config.action_form)
    return MetricScore(
        inform=dialogue_inform(outcome),
        success=dialogue_success(reference.goal, outcome, config.success_mode),
        bleu=corpus_bleu(hyps, refs),
        lam=config.lam,
        success_mode=config.success_mode,
    )


def training_metric(predictions, corpus, config: MetricConfig) -> dict[str, MetricScore]:
    """Per-dialogue training metric for a batch of predictions."""
    by_id = corpus.by_id()
    out = {}
    for pred in predictions:
        if pred.dialogue_id not in by_id:
            raise MetricsError(f"unknown dialogue id {pred.dialogue_id!r}")
        out[pred.dialogue_id] = score_dialogue(
            pred, by_id[pred.dialogue_id], corpus.schemas, config
        )
    return out


def evaluate_predictions(predictions, corpus, config: MetricConfig) -> MetricScore:
    """Corpus-level evaluation: inform/success averaged over dialogues,
    BLEU pooled over all turns."""
    by_id = corpus.by_id()
    informs = []
    successes = []
    hyps = []
    refs = []
    for pred in predictions:
        if pred.dialogue_id not in by_id:
            raise MetricsError(f"unknown dialogue id {pred.dialogue_id!r}")
        reference = by_id[pred.dialogue_id]
        rolled = _predicted_rollout(pred, reference)
        outcome = evaluate_outcome(rolled, corpus.schemas)
        informs.append(dialogue_inform(outcome))
        successes.append(dialogue_success(reference.goal, outcome, config.success_mode))
        h, r = _bleu_pairs(pred, reference, config.action_form)
        hyps.extend(h)
        refs.extend(r)
    if not informs:
        raise MetricsError("no predictions to evaluate")
    return MetricScore(
        inform=sum(informs) / len(informs),
        success=sum(successes) / len(successes),
        bleu=corpus_bleu(hyps, refs),
        lam=config.lam,
        success_mode=config.success_mode,
    )


def report_dict(score: MetricScore, n_dialogues: int) -> dict:
    return {
        "inform_pct": round(score.inform * 100, 4),
        "success_pct": round(score.success * 100, 4),
        "success_mode": score.success_mode,
        "bleu_pct": round(score.bleu * 100, 4),
        "combined": round(score.combined, 4),
        "lambda": score.lam,
        "n_dialogues": n_dialogues,
        "seed_protocol": "median of 5 runs",
    }


def write_report(score: MetricScore, n_dialogues: int, path) -> dict:
    data = report_dict(score, n_dialogues)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(data, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return data
