"""Factorized composite-action policy network with the two-pass mechanism.

The act head emits one logit per token of the closed act vocabulary; a
composite act's probability is the product of independent per-token
Bernoullis, which keeps act likelihoods, importance ratios, and KL terms
exactly computable. The belief-only pass zeroes the user and previous
response encodings, so its output is invariant to those inputs by
construction; the full pass sees all three.
"""

import json

import numpy as np

from caspi import diffkit as dk
from caspi.toywoz import belief_tokens, canonical_act
from caspi.toywoz.corpus import NONE_MARK


class PolicyError(Exception):
    pass


class ObsBatch:
    """Padded id arrays for one batch of observations."""

    __slots__ = ("belief", "belief_len", "user", "user_len", "prev", "prev_len", "size")

    def __init__(self, belief, belief_len, user, user_len, prev, prev_len):
        self.belief = belief
        self.belief_len = belief_len
        self.user = user
        self.user_len = user_len
        self.prev = prev
        self.prev_len = prev_len
        self.size = belief.shape[0]


class PolicyModel:
    def __init__(
        self,
        vocab: dict[str, int],
        act_vocab: list[str],
        embed_dim: int = 16,
        hidden: int = 24,
        head_hidden: int = 64,
        seed: int = 0,
    ):
        self.vocab = vocab
        self.act_vocab = list(act_vocab)
        self.act_index = {a: i for i, a in enumerate(self.act_vocab)}
        self.embed_dim = embed_dim
        self.hidden = hidden
        self.head_hidden = head_hidden
        self.store = dk.ParamStore(seed=seed)
        self.enc_belief = dk.SequenceEncoder(self.store, "belief", len(vocab), embed_dim, hidden)
        self.enc_user = dk.SequenceEncoder(self.store, "user", len(vocab), embed_dim, hidden)
        self.enc_prev = dk.SequenceEncoder(self.store, "prev", len(vocab), embed_dim, hidden)
        self.head = dk.MLP(self.store, "head", [6 * hidden, head_hidden, len(self.act_vocab)])

    # -- featurization ------------------------------------------------------

    def _ids(self, tokens) -> list[int]:
        try:
            return [self.vocab[t] for t in tokens]
        except KeyError as exc:
            raise PolicyError(f"token {exc.args[0]!r} not in policy vocabulary") from exc

    def encode_observations(self, turns_with_prev) -> ObsBatch:
        """turns_with_prev: iterable of (turn, prev_resp_tokens)."""
        beliefs, users, prevs = [], [], []
        for turn, prev_resp in turns_with_prev:
            beliefs.append(self._ids(belief_tokens(turn.belief)))
            users.append(self._ids(turn.user_tokens))
            prevs.append(self._ids(prev_resp if prev_resp else [NONE_MARK]))
        b, bl = dk.pad_batch(beliefs)
        u, ul = dk.pad_batch(users)
        p, pl = dk.pad_batch(prevs)
        return ObsBatch(b, bl, u, ul, p, pl)

    def act_mask(self, acts) -> np.ndarray:
        """(B, V_act) 0/1 mask, one row per composite act."""
        mask = np.zeros((len(acts), len(self.act_vocab)))
        for i, act in enumerate(acts):
            for tok in act:
                if tok not in self.act_index:
                    raise PolicyError(f"act token {tok!r} not in act vocabulary")
                mask[i, self.act_index[tok]] = 1.0
        return mask

    # -- forward passes -------------------------------------------------------

    def logits(self, tape: dk.Tape, obs: ObsBatch, belief_only: bool):
        enc_b = self.enc_belief(tape, obs.belief, obs.belief_len)
        if belief_only:
            zeros = tape.input(np.zeros((obs.size, 2 * self.hidden)))
            enc_u = zeros
            enc_p = zeros
        else:
            enc_u = self.enc_user(tape, obs.user, obs.user_len)
            enc_p = self.enc_prev(tape, obs.prev, obs.prev_len)
        feats = tape.concat([enc_b, enc_u, enc_p], axis=1)
        return self.head(tape, feats)

    def token_probs(self, obs: ObsBatch, belief_only: bool = False) -> np.ndarray:
        tape = dk.Tape()
        logits = self.logits(tape, obs, belief_only)
        return 1.0 / (1.0 + np.exp(-logits.value))

    def act_log_probs(self, tape, logits, acts):
        """log pi(a | obs) for the given composite acts, shape (B,)."""
        mask = tape.input(self.act_mask(acts))
        hit = tape.sum(tape.mul(logits, mask), axis=1)
        norm = tape.sum(tape.softplus(logits), axis=1)
        return tape.sub(hit, norm)

    def inventory_log_probs(self, tape, logits, inventory_mask: np.ndarray):
        """log pi(a | obs) for every inventory act: (B, n_acts) = X @ M.T
        minus the per-row softplus normalizer (returned separately)."""
        xm = tape.matmul(logits, tape.input(inventory_mask.T))
        norm = tape.sum(tape.softplus(logits), axis=1)
        return xm, norm

    # -- decoding ----------------------------------------------------------------

    def decode(self, obs: ObsBatch, threshold: float = 0.5):
        """Greedy factorized decode: all tokens at/above threshold, else the
        argmax token; returns canonical composite acts."""
        probs = self.token_probs(obs, belief_only=False)
        acts = []
        for row in probs:
            chosen = [self.act_vocab[i] for i in np.nonzero(row >= threshold)[0]]
            if not chosen:
                chosen = [self.act_vocab[int(row.argmax())]]
            acts.append(canonical_act(chosen))
        return acts

    # -- persistence ----------------------------------------------------------------

    def meta(self) -> dict:
        return {
            "kind": "policy",
            "embed_dim": self.embed_dim,
            "hidden": self.hidden,
            "head_hidden": self.head_hidden,
            "act_vocab": self.act_vocab,
            "vocab_size": len(self.vocab),
        }

    def save(self, ckpt_path, meta_path=None):
        self.store.save(ckpt_path)
        if meta_path is not None:
            with open(meta_path, "w", encoding="utf-8", newline="\n") as fh:
                json.dump(self.meta(), fh, sort_keys=True, indent=2)
                fh.write("\n")

    @classmethod
    def load(cls, ckpt_path, vocab, act_vocab, embed_dim, hidden, head_hidden=64):
        model = cls(vocab, act_vocab, embed_dim, hidden, head_hidden, seed=0)
        loaded = dk.ParamStore.load(ckpt_path)
        for name in model.store.names():
            model.store.set_values(name, loaded.get(name))
        return model
