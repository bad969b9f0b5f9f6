"""Epoch-wise rollout harvesting from K-fold likelihood baselines.

Each fold trains the policy network by pure likelihood on its train side;
after every epoch it predicts on its held-out val side, each prediction is
scored by the per-dialogue training metric and appended to the preference
dataset with (fold, epoch) provenance. A diverging fold is aborted and
reported; the remaining folds continue.
"""

from dataclasses import dataclass, replace

from caspi.dialmetrics import MetricConfig, training_metric
from caspi.policy import TrainConfig, TrainingDiverged, predict_split, train_policy

from .dp import ScoredRollout
from .folds import FoldSpec


@dataclass
class HarvestResult:
    scored: list[ScoredRollout]
    aborted_folds: list[tuple[int, str]]


def harvest(
    corpus,
    fold_spec: FoldSpec,
    baseline_config: TrainConfig,
    metric_config: MetricConfig,
    epochs: int,
    include_reference: bool = False,
    decode_seed: int = 0,
) -> HarvestResult:
    by_id = corpus.by_id()
    scored: list[ScoredRollout] = []
    aborted: list[tuple[int, str]] = []

    for fold_idx, fold in enumerate(fold_spec.folds):
        train_rolls = [by_id[d] for d in fold.train_ids]
        val_rolls = [by_id[d] for d in fold.val_ids]
        cfg = replace(
            baseline_config,
            mode="ce_baseline",
            epochs=epochs,
            seed=fold_spec.seed + 1000 * (fold_idx + 1),
        )

        def after_epoch(epoch, model, _val=val_rolls, _fold=fold_idx):
            preds = predict_split(
                model,
                corpus,
                "train",
                threshold=cfg.threshold,
                decode_seed=decode_seed,
                rollouts=_val,
            )
            scores = training_metric(preds, corpus, metric_config)
            for pred in preds:
                m = scores[pred.dialogue_id]
                scored.append(
                    ScoredRollout(
                        dialogue_id=pred.dialogue_id,
                        fold=_fold,
                        epoch=epoch,
                        acts=pred.acts,
                        responses=pred.responses,
                        metric={
                            "inform": m.inform,
                            "success": m.success,
                            "bleu": m.bleu,
                            "M": m.training_metric,
                        },
                    )
                )

        try:
            train_policy(corpus, cfg, rollouts=train_rolls, hooks={"epoch_end": after_epoch})
        except TrainingDiverged as exc:
            scored = [s for s in scored if s.fold != fold_idx]
            aborted.append((fold_idx, str(exc)))

    if include_reference:
        used = {s.dialogue_id for s in scored}
        for did in sorted(used):
            roll = by_id[did]
            pred_like = [
                (roll.dialogue_id, [t.act_tokens for t in roll.turns],
                 [list(t.resp_tokens) for t in roll.turns])
            ]
            from caspi.dialmetrics import PredictedDialogue

            pd = PredictedDialogue(*pred_like[0])
            m = training_metric([pd], corpus, metric_config)[did]
            scored.append(
                ScoredRollout(
                    dialogue_id=did,
                    fold=-1,
                    epoch=-1,
                    acts=pd.acts,
                    responses=pd.responses,
                    metric={
                        "inform": m.inform,
                        "success": m.success,
                        "bleu": m.bleu,
                        "M": m.training_metric,
                    },
                )
            )
    return HarvestResult(scored=scored, aborted_folds=aborted)
