"""Per-turn bounded reward network.

Three sequence encoders (goal, belief state, action) feed a feed-forward
head with a sigmoid output, so each turn's reward lies in (0, 1); a
rollout's score is the sum of its per-turn rewards.
"""

import json

import numpy as np

from caspi import diffkit as dk
from caspi.toywoz import belief_tokens, goal_tokens
from caspi.toywoz.corpus import NONE_MARK

PHI_CHOICES = ("identity", "exp")


class RewardModelError(Exception):
    pass


class TurnBatch:
    __slots__ = ("goal", "goal_len", "belief", "belief_len", "action", "action_len", "size")

    def __init__(self, goal, goal_len, belief, belief_len, action, action_len):
        self.goal = goal
        self.goal_len = goal_len
        self.belief = belief
        self.belief_len = belief_len
        self.action = action
        self.action_len = action_len
        self.size = goal.shape[0]


class RewardModel:
    def __init__(
        self,
        vocab: dict[str, int],
        phi: str = "identity",
        action_form: str = "act",
        embed_dim: int = 32,
        hidden: int = 64,
        head_dims: tuple[int, ...] = (128, 64),
        seed: int = 0,
        fingerprint: str = "",
    ):
        if phi not in PHI_CHOICES:
            raise RewardModelError(f"phi must be one of {PHI_CHOICES}")
        if action_form not in ("act", "resp"):
            raise RewardModelError("action form must be 'act' or 'resp'")
        self.vocab = vocab
        self.phi = phi
        self.action_form = action_form
        self.embed_dim = embed_dim
        self.hidden = hidden
        self.head_dims = tuple(head_dims)
        self.fingerprint = fingerprint
        self.store = dk.ParamStore(seed=seed)
        self.enc_goal = dk.SequenceEncoder(self.store, "goal", len(vocab), embed_dim, hidden)
        self.enc_belief = dk.SequenceEncoder(self.store, "belief", len(vocab), embed_dim, hidden)
        self.enc_action = dk.SequenceEncoder(self.store, "action", len(vocab), embed_dim, hidden)
        self.head = dk.MLP(self.store, "head", [6 * hidden, *self.head_dims, 1])

    def _ids(self, tokens) -> list[int]:
        try:
            return [self.vocab[t] for t in tokens]
        except KeyError as exc:
            raise RewardModelError(
                f"token {exc.args[0]!r} not in reward-model vocabulary"
            ) from exc

    def action_tokens(self, acts, resp_tokens) -> list[str]:
        seq = list(acts) if self.action_form == "act" else list(resp_tokens)
        return seq if seq else [NONE_MARK]

    def encode_turns(self, rows) -> TurnBatch:
        """rows: iterable of (goal, belief, acts, resp_tokens)."""
        goals, beliefs, actions = [], [], []
        for goal, belief, acts, resp in rows:
            goals.append(self._ids(goal_tokens(goal)))
            beliefs.append(self._ids(belief_tokens(belief)))
            actions.append(self._ids(self.action_tokens(acts, resp)))
        g, gl = dk.pad_batch(goals)
        b, bl = dk.pad_batch(beliefs)
        a, al = dk.pad_batch(actions)
        return TurnBatch(g, gl, b, bl, a, al)

    def turn_rewards(self, tape: dk.Tape, batch: TurnBatch):
        """Bounded per-turn rewards, shape (B,)."""
        eg = self.enc_goal(tape, batch.goal, batch.goal_len)
        eb = self.enc_belief(tape, batch.belief, batch.belief_len)
        ea = self.enc_action(tape, batch.action, batch.action_len)
        feats = tape.concat([eg, eb, ea], axis=1)
        out = self.head(tape, feats)
        return tape.slice(tape.sigmoid(out), (slice(None), 0))

    def score_rows(self, rows) -> np.ndarray:
        """Per-turn rewards as plain numbers, no gradient bookkeeping."""
        tape = dk.Tape()
        return self.turn_rewards(tape, self.encode_turns(rows)).value.copy()

    def meta(self) -> dict:
        return {
            "kind": "reward",
            "phi": self.phi,
            "action_form": self.action_form,
            "embed_dim": self.embed_dim,
            "hidden": self.hidden,
            "head_dims": list(self.head_dims),
            "fingerprint": self.fingerprint,
            "vocab_size": len(self.vocab),
        }

    def save(self, ckpt_path, meta_path):
        self.store.save(ckpt_path)
        with open(meta_path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.meta(), fh, sort_keys=True, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, ckpt_path, meta_path, vocab) -> "RewardModel":
        with open(meta_path, encoding="utf-8") as fh:
            meta = json.load(fh)
        model = cls(
            vocab,
            phi=meta["phi"],
            action_form=meta["action_form"],
            embed_dim=meta["embed_dim"],
            hidden=meta["hidden"],
            head_dims=tuple(meta["head_dims"]),
            seed=0,
            fingerprint=meta["fingerprint"],
        )
        loaded = dk.ParamStore.load(ckpt_path)
        for name in model.store.names():
            model.store.set_values(name, loaded.get(name))
        return model
