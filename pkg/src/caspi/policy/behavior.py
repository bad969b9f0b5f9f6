"""Belief-conditioned empirical behavior policy with add-alpha smoothing."""

from collections import Counter

import numpy as np

from caspi.toywoz import belief_key


class BehaviorError(Exception):
    pass


class BehaviorTable:
    """Empirical distribution over observed composite acts per belief key.

    Smoothing spreads alpha mass over the global act inventory, so every
    corpus (belief, act) pair has positive probability whenever alpha > 0.
    Unseen belief keys fall back to the global marginal act distribution.
    """

    def __init__(self, inventory, counts, alpha: float):
        self.inventory = list(inventory)
        self.act_pos = {a: i for i, a in enumerate(self.inventory)}
        self.alpha = alpha
        self.counts = counts  # belief key -> Counter over act tuples
        self._global = Counter()
        for ctr in counts.values():
            self._global.update(ctr)
        self._cache: dict[str, np.ndarray] = {}

    @classmethod
    def estimate(cls, rollouts, alpha: float = 0.1) -> "BehaviorTable":
        rollouts = list(rollouts)
        if not rollouts:
            raise BehaviorError("empty corpus")
        counts: dict[str, Counter] = {}
        inventory: dict[tuple, None] = {}
        for roll in rollouts:
            for turn in roll.turns:
                key = belief_key(turn.belief)
                counts.setdefault(key, Counter())[turn.act_tokens] += 1
                inventory.setdefault(turn.act_tokens, None)
        return cls(sorted(inventory), counts, alpha)

    def _vector(self, ctr: Counter) -> np.ndarray:
        n = sum(ctr.values())
        vec = np.full(len(self.inventory), self.alpha)
        for act, c in ctr.items():
            vec[self.act_pos[act]] += c
        return vec / (n + self.alpha * len(self.inventory))

    def probs(self, key: str) -> np.ndarray:
        """Full distribution over the inventory for one belief key."""
        if key not in self._cache:
            ctr = self.counts.get(key, self._global)
            self._cache[key] = self._vector(ctr)
        return self._cache[key]

    def prob(self, key: str, act: tuple) -> float:
        if act not in self.act_pos:
            raise BehaviorError(f"act {act!r} outside the observed inventory")
        return float(self.probs(key)[self.act_pos[act]])

    def entropy(self, key: str) -> float:
        p = self.probs(key)
        p = p[p > 0]
        return float(-(p * np.log(p)).sum())

    def keys(self):
        return list(self.counts)


def estimate_behavior(corpus_or_rollouts, alpha: float = 0.1) -> BehaviorTable:
    rollouts = getattr(corpus_or_rollouts, "rollouts", corpus_or_rollouts)
    return BehaviorTable.estimate(rollouts, alpha)
