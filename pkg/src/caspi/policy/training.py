"""Target-policy training over an annotated corpus."""

from dataclasses import dataclass

import numpy as np

from caspi import diffkit as dk
from caspi.toywoz import act_vocabulary, belief_key

from .behavior import estimate_behavior
from .losses import MODES, LossError, discounted_return, loss_det, loss_sto, total_loss
from .model import PolicyModel


class TrainingDiverged(Exception):
    pass


@dataclass
class TrainConfig:
    gamma: float = 0.9
    eta: float = 0.1
    beta: float = 1.0
    mode: str = "caspi_full"
    data_fraction: float = 1.0
    epochs: int = 12
    batch_size: int = 128
    lr: float = 1e-3
    alpha: float = 0.1
    embed_dim: int = 16
    hidden: int = 24
    head_hidden: int = 64
    threshold: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise LossError(f"gamma must be in [0, 1], got {self.gamma}")
        if not (self.eta > 0 and np.isfinite(self.eta)):
            raise LossError(f"eta must be finite and positive, got {self.eta}")
        if self.mode not in MODES:
            raise LossError(f"mode must be one of {MODES}")
        if not 0.0 < self.data_fraction <= 1.0:
            raise LossError("data fraction must be in (0, 1]")


def subsample_dialogues(rollouts, fraction: float, seed: int):
    """Seeded dialogue-level subsampling; fraction 1.0 is the identity."""
    rollouts = list(rollouts)
    if fraction >= 1.0:
        return rollouts
    n = max(1, int(round(len(rollouts) * fraction)))
    rng = np.random.default_rng(np.random.SeedSequence([seed, len(rollouts)]))
    idx = sorted(rng.choice(len(rollouts), size=n, replace=False).tolist())
    return [rollouts[i] for i in idx]


def turn_samples(rollouts, gamma: float, mode: str):
    """Flatten rollouts into per-turn training samples.

    Returns (turn, prev_resp, act, G, belief_key) tuples. Modes that weight
    by the return require learned rewards on every turn.
    """
    samples = []
    for roll in rollouts:
        if mode == "ce_baseline":
            returns = [1.0] * len(roll.turns)
        else:
            rewards = [t.learned_reward for t in roll.turns]
            if any(r is None for r in rewards):
                raise LossError(
                    f"dialogue {roll.dialogue_id}: missing learned reward "
                    f"annotation required by mode {mode!r}"
                )
            returns = discounted_return(rewards, gamma)
        prev = None
        for turn, g in zip(roll.turns, returns):
            samples.append((turn, prev, turn.act_tokens, g, belief_key(turn.belief)))
            prev = turn.resp_tokens
    return samples


def train_policy(corpus, config: TrainConfig, rollouts=None, hooks=None) -> PolicyModel:
    """Train a policy on the given rollouts (default: the corpus train split)."""
    if rollouts is None:
        rollouts = corpus.split("train")
    rollouts = subsample_dialogues(rollouts, config.data_fraction, config.seed)
    samples = turn_samples(rollouts, config.gamma, config.mode)
    if not samples:
        raise LossError("no training turns")

    model = PolicyModel(
        corpus.vocab,
        act_vocabulary(corpus.schemas),
        embed_dim=config.embed_dim,
        hidden=config.hidden,
        head_hidden=config.head_hidden,
        seed=config.seed,
    )
    state = dk.AdamState(model.store, lr=config.lr)

    table = None
    inv_mask = None
    if config.mode == "caspi_full":
        table = estimate_behavior(rollouts, config.alpha)
        inv_mask = model.act_mask(table.inventory)

    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 7_001]))
    order = np.arange(len(samples))
    for epoch in range(config.epochs):
        rng.shuffle(order)
        for start in range(0, len(order), config.batch_size):
            chunk = [samples[i] for i in order[start : start + config.batch_size]]
            loss_val = _step(model, state, chunk, config, table, inv_mask)
            if not np.isfinite(loss_val):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch}, step {start // config.batch_size}"
                )
        if hooks and "epoch_end" in hooks:
            hooks["epoch_end"](epoch, model)
    return model


def _step(model, state, chunk, config, table, inv_mask):
    obs = model.encode_observations([(t, prev) for t, prev, _, _, _ in chunk])
    acts = [c[2] for c in chunk]
    returns = [c[3] for c in chunk]
    tape = dk.Tape()
    logits_full = model.logits(tape, obs, belief_only=False)
    log_probs = model.act_log_probs(tape, logits_full, acts)
    det = loss_det(tape, log_probs, returns)
    if config.mode == "caspi_full":
        logits_belief = model.logits(tape, obs, belief_only=True)
        pb_obs = np.array([table.prob(key, act) for _, _, act, _, key in chunk])
        pb_inv = np.stack([table.probs(key) for _, _, _, _, key in chunk])
        sto, _ = loss_sto(
            tape,
            model,
            logits_belief,
            acts,
            pb_obs,
            pb_inv,
            inv_mask,
            returns,
            config.beta,
            config.eta,
        )
        loss = total_loss(tape, config.mode, det, sto)
    else:
        loss = total_loss(tape, config.mode, det)
    tape.backward(loss)
    dk.adam_step(model.store, tape.grads, state)
    return float(loss.value)
