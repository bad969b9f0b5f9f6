"""Preference-based reward training and corpus annotation.

Pairs are drawn uniformly over scored rollouts (unrestricted pairing,
without replacement within an epoch). Each pair contributes the soft
cross-entropy between the model's preference probability and the
normalized metric target (or a human label). Training stops when held-out
pair ranking accuracy stops improving for a patience window.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from caspi import diffkit as dk

from .dp import HumanPair, ScoredRollout
from .model import PHI_CHOICES, RewardModel, RewardModelError


class RewardTrainingError(Exception):
    pass


def preference_prob(r1: float, r2: float, phi: str = "identity") -> float:
    """P[rollout 1 preferred over rollout 2] = phi(r1) / (phi(r1) + phi(r2))."""
    if phi not in PHI_CHOICES:
        raise RewardTrainingError(f"phi must be one of {PHI_CHOICES}")
    if not (math.isfinite(r1) and math.isfinite(r2)):
        raise RewardTrainingError("scores must be finite")
    if phi == "identity":
        if r1 < 0 or r2 < 0 or r1 + r2 == 0:
            raise RewardTrainingError(
                "identity phi needs nonnegative scores with positive sum"
            )
        return r1 / (r1 + r2)
    # exp phi reduces to a logistic in the score difference
    return 1.0 / (1.0 + math.exp(-(r1 - r2)))


def mu_target(m1: float, m2: float) -> float | None:
    """Normalized metric target; None when both scores are zero."""
    if m1 + m2 == 0:
        return None
    return m1 / (m1 + m2)


@dataclass
class RewardTrainConfig:
    phi: str = "identity"
    action_form: str = "act"
    embed_dim: int = 32
    hidden: int = 64
    head_dims: tuple[int, ...] = (128, 64)
    lr: float = 1e-3
    batch_pairs: int = 16
    max_epochs: int = 20
    eval_every: int = 40
    patience: int = 10
    val_fraction: float = 0.1
    max_pairs_per_epoch: int | None = None
    max_val_pairs: int = 300
    seed: int = 0


@dataclass
class RewardTrainLog:
    metric_pairs: int = 0
    human_pairs: int = 0
    zero_metric_skipped: int = 0
    evals: list = field(default_factory=list)
    best_accuracy: float = 0.0
    stopped_early: bool = False
    steps: int = 0


def rollout_rows(reference, acts, responses):
    """Per-turn (goal, belief, acts, resp) rows against reference context."""
    if len(acts) != len(reference.turns):
        raise RewardTrainingError(
            f"dialogue {reference.dialogue_id}: prediction has {len(acts)} turns, "
            f"reference has {len(reference.turns)}"
        )
    rows = []
    for i, turn in enumerate(reference.turns):
        resp = responses[i] if responses else []
        rows.append((reference.goal, turn.belief, acts[i], resp))
    return rows


def _pair_terms(tape, model, rows1, rows2, mu1):
    batch = model.encode_turns(rows1 + rows2)
    rewards = model.turn_rewards(tape, batch)
    n1 = len(rows1)
    r1 = tape.sum(tape.slice(rewards, slice(0, n1)))
    r2 = tape.sum(tape.slice(rewards, slice(n1, n1 + len(rows2))))
    return _pair_loss_from_scores(tape, model.phi, r1, r2, mu1)


def _pair_loss_from_scores(tape, phi, r1, r2, mu1):
    if phi == "identity":
        log_total = tape.log(tape.add(r1, r2))
        log_p1 = tape.sub(tape.log(r1), log_total)
        log_p2 = tape.sub(tape.log(r2), log_total)
    else:
        diff = tape.sub(r1, r2)
        log_p1 = tape.neg(tape.softplus(tape.neg(diff)))
        log_p2 = tape.neg(tape.softplus(diff))
    term = tape.add(tape.scale(log_p1, mu1), tape.scale(log_p2, 1.0 - mu1))
    return tape.neg(term)


def pair_loss(model: RewardModel, rows1, rows2, mu1: float):
    """(tape, scalar loss node) for one preference pair."""
    tape = dk.Tape()
    return tape, _pair_terms(tape, model, rows1, rows2, mu1)


def _batched_pair_loss(tape, model, pair_rows, mus):
    """Mean pair loss over a batch. pair_rows is a list of (rows1, rows2)."""
    all_rows = []
    segments = []
    for rows1, rows2 in pair_rows:
        a = len(all_rows)
        all_rows.extend(rows1)
        b = len(all_rows)
        all_rows.extend(rows2)
        segments.append((a, b, len(all_rows)))
    batch = model.encode_turns(all_rows)
    rewards = model.turn_rewards(tape, batch)
    s1 = np.zeros((len(segments), len(all_rows)))
    s2 = np.zeros((len(segments), len(all_rows)))
    for i, (a, b, c) in enumerate(segments):
        s1[i, a:b] = 1.0
        s2[i, b:c] = 1.0
    col = tape.slice(rewards, (slice(None), None))  # (B,) -> (B,1)
    r1 = tape.matmul(tape.input(s1), col)
    r2 = tape.matmul(tape.input(s2), col)
    mu = np.asarray(mus, dtype=np.float64).reshape(-1, 1)
    if model.phi == "identity":
        log_total = tape.log(tape.add(r1, r2))
        log_p1 = tape.sub(tape.log(r1), log_total)
        log_p2 = tape.sub(tape.log(r2), log_total)
    else:
        diff = tape.sub(r1, r2)
        log_p1 = tape.neg(tape.softplus(tape.neg(diff)))
        log_p2 = tape.neg(tape.softplus(diff))
    weighted = tape.add(
        tape.mul(tape.input(mu), log_p1), tape.mul(tape.input(1.0 - mu), log_p2)
    )
    return tape.neg(tape.mean(weighted))


def _rollout_scores(model, by_id, scored_list, chunk=64):
    """Summed per-turn rewards for a list of scored rollouts."""
    out = np.zeros(len(scored_list))
    for start in range(0, len(scored_list), chunk):
        part = scored_list[start : start + chunk]
        rows = []
        bounds = []
        for s in part:
            a = len(rows)
            rows.extend(rollout_rows(by_id[s.dialogue_id], s.acts, s.responses))
            bounds.append((a, len(rows)))
        values = model.score_rows(rows)
        for i, (a, b) in enumerate(bounds):
            out[start + i] = values[a:b].sum()
    return out


def ranking_accuracy(model, by_id, val_pairs) -> float:
    flat = [s for pair in val_pairs for s in pair]
    scores = _rollout_scores(model, by_id, flat)
    correct = 0
    for i, (s1, s2) in enumerate(val_pairs):
        pred = scores[2 * i] - scores[2 * i + 1]
        truth = s1.score - s2.score
        correct += (pred > 0) == (truth > 0)
    return correct / len(val_pairs) if val_pairs else 0.0


def train_reward(
    scored: list[ScoredRollout],
    corpus,
    config: RewardTrainConfig,
    human_pairs: list[HumanPair] = (),
    mix_prob: float = 0.0,
):
    """Fit the reward model on metric-scored rollouts, optionally mixing in
    human-labeled pairs with probability mix_prob per minibatch element."""
    if not 0.0 <= mix_prob <= 1.0:
        raise RewardTrainingError("mix_prob must be in [0, 1]")
    if mix_prob > 0 and not human_pairs:
        raise RewardTrainingError(
            f"mix_prob={mix_prob} requires human-labeled pairs, none provided"
        )
    usable = [s for s in scored if math.isfinite(s.score)]
    if len(usable) < 2:
        raise RewardTrainingError("need at least two finite-score rollouts")

    by_id = corpus.by_id()
    model = RewardModel(
        corpus.vocab,
        phi=config.phi,
        action_form=config.action_form,
        embed_dim=config.embed_dim,
        hidden=config.hidden,
        head_dims=config.head_dims,
        seed=config.seed,
        fingerprint=corpus.fingerprint,
    )
    state = dk.AdamState(model.store, lr=config.lr)
    log = RewardTrainLog()

    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 23]))
    pool = list(usable)
    rng.shuffle(pool)
    n_val = max(2, int(len(pool) * config.val_fraction))
    val, train = pool[:n_val], pool[n_val:]
    if len(train) < 2:
        train = pool
    val_pairs = [
        (val[i], val[i + 1])
        for i in range(0, len(val) - 1, 2)
        if val[i].score != val[i + 1].score
    ][: config.max_val_pairs]

    best = -1.0
    since_best = 0
    stop = False
    for _epoch in range(config.max_epochs):
        order = rng.permutation(len(train))
        stream = []
        for i in range(0, len(order) - 1, 2):
            s1, s2 = train[order[i]], train[order[i + 1]]
            mu = mu_target(s1.score, s2.score)
            if mu is None:
                log.zero_metric_skipped += 1
                continue
            stream.append((s1, s2, mu))
        if config.max_pairs_per_epoch is not None:
            stream = stream[: config.max_pairs_per_epoch]
        if not stream:
            raise RewardTrainingError("no finite-score pairs to train on")

        for start in range(0, len(stream), config.batch_pairs):
            batch_rows = []
            mus = []
            for s1, s2, mu in stream[start : start + config.batch_pairs]:
                if mix_prob > 0 and rng.random() < mix_prob:
                    hp = human_pairs[int(rng.integers(len(human_pairs)))]
                    ref = by_id[hp.dialogue_id]
                    batch_rows.append(
                        (
                            rollout_rows(ref, hp.c1_acts, hp.c1_responses),
                            rollout_rows(ref, hp.c2_acts, hp.c2_responses),
                        )
                    )
                    mus.append(hp.mu_c1)
                    log.human_pairs += 1
                else:
                    ref1 = by_id[s1.dialogue_id]
                    ref2 = by_id[s2.dialogue_id]
                    batch_rows.append(
                        (
                            rollout_rows(ref1, s1.acts, s1.responses),
                            rollout_rows(ref2, s2.acts, s2.responses),
                        )
                    )
                    mus.append(mu)
                    log.metric_pairs += 1
            tape = dk.Tape()
            loss = _batched_pair_loss(tape, model, batch_rows, mus)
            if not np.isfinite(loss.value):
                raise RewardTrainingError("non-finite pair loss")
            tape.backward(loss)
            dk.adam_step(model.store, tape.grads, state)
            log.steps += 1

            if val_pairs and log.steps % config.eval_every == 0:
                acc = ranking_accuracy(model, by_id, val_pairs)
                log.evals.append((log.steps, acc))
                if acc > best + 1e-12:
                    best = acc
                    since_best = 0
                else:
                    since_best += 1
                if since_best >= config.patience:
                    log.stopped_early = True
                    stop = True
                    break
        if stop:
            break
    log.best_accuracy = max(best, 0.0)
    return model, log


def annotate_corpus(corpus, model: RewardModel, chunk: int = 512):
    """Write per-turn learned rewards into every rollout of the corpus."""
    if model.fingerprint and model.fingerprint != corpus.fingerprint:
        raise RewardModelError(
            f"vocabulary fingerprint mismatch: model {model.fingerprint!r} "
            f"vs corpus {corpus.fingerprint!r}"
        )
    slots = []
    rows = []
    for roll in corpus.rollouts:
        for turn in roll.turns:
            slots.append(turn)
            rows.append((roll.goal, turn.belief, turn.act_tokens, turn.resp_tokens))
    for start in range(0, len(rows), chunk):
        values = model.score_rows(rows[start : start + chunk])
        for turn, val in zip(slots[start : start + chunk], values):
            turn.learned_reward = float(val)
    return corpus
