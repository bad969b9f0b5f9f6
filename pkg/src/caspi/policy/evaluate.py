"""Context-to-response decoding and scoring against reference observations."""

import json

import numpy as np

from caspi.dialmetrics import MetricConfig, PredictedDialogue, evaluate_predictions
from caspi.toywoz import realize_response

from .losses import discounted_return

DECODE_CHUNK = 512


def _decode_rng(decode_seed: int, dialogue_index: int, turn_index: int):
    return np.random.default_rng(
        np.random.SeedSequence([decode_seed, dialogue_index, turn_index])
    )


def predict_split(model, corpus, split: str, threshold: float = 0.5,
                  decode_seed: int = 0, rollouts=None):
    """Decode acts per turn conditioned on reference observations and
    realize responses with a fixed decode seed."""
    rollouts = list(rollouts) if rollouts is not None else corpus.split(split)
    flat = []
    for d_idx, roll in enumerate(rollouts):
        prev = None
        for t_idx, turn in enumerate(roll.turns):
            flat.append((d_idx, t_idx, turn, prev))
            prev = turn.resp_tokens
    acts_by_pos = {}
    for start in range(0, len(flat), DECODE_CHUNK):
        chunk = flat[start : start + DECODE_CHUNK]
        obs = model.encode_observations([(t, prev) for _, _, t, prev in chunk])
        decoded = model.decode(obs, threshold=threshold)
        for (d_idx, t_idx, _, _), act in zip(chunk, decoded):
            acts_by_pos[(d_idx, t_idx)] = act
    predictions = []
    for d_idx, roll in enumerate(rollouts):
        acts = [acts_by_pos[(d_idx, t)] for t in range(len(roll.turns))]
        responses = [
            realize_response(act, _decode_rng(decode_seed, d_idx, t))
            for t, act in enumerate(acts)
        ]
        predictions.append(
            PredictedDialogue(
                dialogue_id=roll.dialogue_id, acts=acts, responses=responses
            )
        )
    return predictions


def evaluate_policy(model, corpus, split: str, metric_config: MetricConfig,
                    threshold: float = 0.5, decode_seed: int = 0, gamma: float = 0.9):
    """Score decoded predictions; returns (score, predictions, trace rows)."""
    rollouts = corpus.split(split)
    predictions = predict_split(
        model, corpus, split, threshold=threshold, decode_seed=decode_seed
    )
    score = evaluate_predictions(predictions, corpus, metric_config)
    trace = []
    for roll, pred in zip(rollouts, predictions):
        rewards = [t.learned_reward for t in roll.turns]
        returns = (
            discounted_return(rewards, gamma) if None not in rewards else None
        )
        trace.append(
            {
                "dialogue_id": roll.dialogue_id,
                "acts": [list(a) for a in pred.acts],
                "responses": pred.responses,
                "returns": returns,
                "learned_rewards": rewards if None not in rewards else None,
            }
        )
    return score, predictions, trace


def write_trace(trace, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in trace:
            fh.write(json.dumps(row, sort_keys=True, separators=(",", ":")))
            fh.write("\n")
