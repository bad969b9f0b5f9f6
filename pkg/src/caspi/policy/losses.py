"""Policy-improvement losses: importance-weighted stochastic term with a
KL budget hinge, the return-weighted deterministic term, and the
reward-as-sample-weight update for blackbox likelihood trainers."""

import numpy as np

from caspi import diffkit as dk

MODES = ("caspi_full", "det_only", "ce_baseline")


class LossError(Exception):
    pass


def discounted_return(turn_rewards, gamma: float) -> list[float]:
    """Backward recursion: G_t = r_t + gamma * G_{t+1}; G_{T-1} = r_{T-1}."""
    rewards = [float(r) for r in turn_rewards]
    if any(r != r or r in (float("inf"), float("-inf")) for r in rewards):
        raise LossError("non-finite turn reward")
    out = [0.0] * len(rewards)
    acc = 0.0
    for t in range(len(rewards) - 1, -1, -1):
        acc = rewards[t] + gamma * acc
        out[t] = acc
    return out


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    """D_KL(p || q) over a shared support; zero p entries contribute zero."""
    mask = p > 0
    return float((p[mask] * (np.log(p[mask]) - np.log(q[mask]))).sum())


def loss_det(tape, log_probs, returns):
    """-mean(G * log pi(a_t | o_t)). With G = 1 this is exactly the
    likelihood (ce_baseline) loss."""
    g = tape.input(np.asarray(returns, dtype=np.float64))
    return tape.neg(tape.mean(tape.mul(g, log_probs)))


def loss_sto(tape, policy, logits_belief, acts, behavior_probs_obs,
             behavior_probs_inv, inventory_mask, returns, beta, eta):
    """Importance-weighted return term plus the hinged KL budget penalty.

    logits_belief comes from the belief-only pass; behavior probabilities
    are constants, so gradients flow only through the target policy.
    """
    behavior_probs_obs = np.asarray(behavior_probs_obs, dtype=np.float64)
    if (behavior_probs_obs <= 0).any():
        raise LossError("behavior probability 0 for an observed act")
    log_pe_obs = policy.act_log_probs(tape, logits_belief, acts)
    ratio = tape.exp(
        tape.sub(log_pe_obs, tape.input(np.log(behavior_probs_obs)))
    )
    g = tape.input(np.asarray(returns, dtype=np.float64))
    main = tape.neg(tape.mean(tape.mul(ratio, g)))

    # KL(pi_b || pi_e) per sample over the act inventory:
    #   sum_a pb(a) * (log pb(a) - log pe(a))
    # with log pe(a) = xm(a) - norm; since sum_a pb = 1 the norm pulls out.
    pb = np.asarray(behavior_probs_inv, dtype=np.float64)
    log_pb = np.where(pb > 0, np.log(np.maximum(pb, 1e-300)), 0.0)
    xm, norm = policy.inventory_log_probs(tape, logits_belief, inventory_mask)
    inner = tape.sum(tape.mul(tape.input(pb), tape.sub(tape.input(log_pb), xm)), axis=1)
    kl_per_sample = tape.add(inner, norm)
    mean_kl = tape.mean(kl_per_sample)
    penalty = tape.scale(tape.relu(tape.add_const(mean_kl, -eta)), beta)
    return tape.add(main, penalty), mean_kl


def total_loss(tape, mode, det_term, sto_term=None):
    if mode not in MODES:
        raise LossError(f"mode must be one of {MODES}")
    if mode == "caspi_full":
        if sto_term is None:
            raise LossError("caspi_full requires the stochastic term")
        return tape.add(sto_term, det_term)
    return det_term


def sample_weight_update(tape, per_turn_nll, rewards):
    """Scale each turn's likelihood-loss contribution by its learned reward.

    The unweighted blackbox loss this pairs with is sum(per_turn_nll), so
    rewards of all c scale the update by exactly c.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    if rewards.shape != per_turn_nll.shape:
        raise LossError(
            f"rewards shape {rewards.shape} vs loss terms {per_turn_nll.shape}"
        )
    return tape.sum(tape.mul(tape.input(rewards), per_turn_nll))
