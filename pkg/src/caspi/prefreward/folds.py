"""K-fold subsampling of the train split for baseline harvesting."""

from dataclasses import dataclass

import numpy as np


class FoldError(Exception):
    pass


@dataclass
class Fold:
    train_ids: list[str]
    val_ids: list[str]


@dataclass
class FoldSpec:
    k: int
    seed: int
    folds: list[Fold]


def kfold_split(corpus, k: int, seed: int, train_fraction: float = 1.0) -> FoldSpec:
    """Hold out a distinct 1/k of train dialogues as each fold's val set.

    train_fraction < 1 subsamples each fold's train side (the val side is
    always the full held-out chunk).
    """
    ids = [r.dialogue_id for r in corpus.split("train")]
    if k < 2:
        raise FoldError(f"k must be >= 2, got {k}")
    if k > len(ids):
        raise FoldError(f"k={k} exceeds {len(ids)} train dialogues")
    if not 0.0 < train_fraction <= 1.0:
        raise FoldError("train fraction must be in (0, 1]")
    rng = np.random.default_rng(np.random.SeedSequence([seed, k]))
    perm = rng.permutation(len(ids))
    chunks = np.array_split(perm, k)
    folds = []
    for i, chunk in enumerate(chunks):
        val = sorted(ids[j] for j in chunk)
        val_set = set(val)
        rest = [d for d in ids if d not in val_set]
        if train_fraction < 1.0:
            n = max(1, int(round(len(rest) * train_fraction)))
            pick = rng.choice(len(rest), size=n, replace=False)
            rest = sorted(rest[j] for j in pick)
        folds.append(Fold(train_ids=rest, val_ids=val))
    return FoldSpec(k=k, seed=seed, folds=folds)
