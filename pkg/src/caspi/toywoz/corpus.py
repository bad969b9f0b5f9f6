"""Offline corpus generation, vocabulary closure, and JSONL persistence."""

import json
from dataclasses import dataclass, field

import numpy as np

from .acts import act_vocabulary
from .goals import GoalConfig, sample_goal
from .schema import (
    BUCKET_FEW,
    BUCKET_MANY,
    BUCKET_NONE,
    BUCKET_ONE,
    DomainSchema,
    default_schema_set,
    schema_fingerprint,
)
from .simulator import ExpertProfile, Rollout, simulate_dialogue
from .templates import surface_vocabulary

PAD = "<pad>"
GOAL_MARK = "<goal>"
BELIEF_MARK = "<belief>"
REQ_MARK = "<req>"
BOOK_MARK = "<book>"
NONE_MARK = "<none>"  # stands in for the empty previous response at t=0
BUCKETS = (BUCKET_NONE, BUCKET_ONE, BUCKET_FEW, BUCKET_MANY)


@dataclass
class EnvConfig:
    n_train: int = 3000
    n_val: int = 500
    n_test: int = 500
    db_seed: int = 7
    max_turns: int = 13
    profile: ExpertProfile = field(default_factory=ExpertProfile)
    goal: GoalConfig = field(default_factory=GoalConfig)


def build_vocabulary(schemas: dict[str, DomainSchema]) -> dict[str, int]:
    """Closed token inventory: every token any rollout can contain."""
    tokens = set(surface_vocabulary(schemas))
    tokens.update(act_vocabulary(schemas))
    tokens.update([GOAL_MARK, BELIEF_MARK, REQ_MARK, BOOK_MARK, NONE_MARK])
    tokens.update(BUCKETS)
    for name, schema in schemas.items():
        tokens.add(name)
        for slot, values in schema.informable.items():
            tokens.add(slot)
            tokens.update(values)
        tokens.update(schema.requestable)
    vocab = {PAD: 0}
    for tok in sorted(tokens):
        vocab[tok] = len(vocab)
    return vocab


def goal_tokens(goal) -> list[str]:
    out = [GOAL_MARK]
    for d, dg in sorted(goal.domains.items()):
        out.append(d)
        for slot, value in sorted(dg.constraints.items()):
            out.extend([slot, value])
        plain = [s for s in dg.requests if s != "ref"]
        if plain:
            out.append(REQ_MARK)
            out.extend(sorted(plain))
        if dg.book:
            out.append(BOOK_MARK)
    return out


def belief_tokens(belief: dict) -> list[str]:
    out = [BELIEF_MARK]
    for d, entry in sorted(belief.items()):
        out.append(d)
        for slot, value in sorted(entry["constraints"].items()):
            out.extend([slot, value])
        out.append(entry["bucket"])
    return out


def belief_key(belief: dict) -> str:
    return json.dumps(belief, sort_keys=True, separators=(",", ":"))


@dataclass
class Corpus:
    rollouts: list[Rollout]
    vocab: dict[str, int]
    seed: int
    fingerprint: str
    schemas: dict[str, DomainSchema]

    def split(self, name: str) -> list[Rollout]:
        return [r for r in self.rollouts if r.split == name]

    def by_id(self) -> dict[str, Rollout]:
        return {r.dialogue_id: r for r in self.rollouts}

    def encode(self, tokens) -> list[int]:
        return [self.vocab[t] for t in tokens]

    def act_inventory(self) -> list[tuple[str, ...]]:
        seen = {}
        for r in self.rollouts:
            for t in r.turns:
                seen.setdefault(t.act_tokens, None)
        return sorted(seen)


def derived_rng(master_seed: int, index: int):
    """Per-dialogue generator; worker order can never change the stream."""
    return np.random.default_rng(np.random.SeedSequence([master_seed, index]))


def generate_corpus(config: EnvConfig, seed: int) -> Corpus:
    schemas = default_schema_set(config.db_seed)
    vocab = build_vocabulary(schemas)
    rollouts = []
    index = 0
    for split, count in (
        ("train", config.n_train),
        ("val", config.n_val),
        ("test", config.n_test),
    ):
        for i in range(count):
            rng = derived_rng(seed, index)
            goal = sample_goal(schemas, rng, config.goal)
            rollouts.append(
                simulate_dialogue(
                    goal,
                    schemas,
                    config.profile,
                    rng,
                    max_turns=config.max_turns,
                    dialogue_id=f"{split}-{i:04d}",
                    split=split,
                )
            )
            index += 1
    return Corpus(
        rollouts=rollouts,
        vocab=vocab,
        seed=seed,
        fingerprint=schema_fingerprint(schemas),
        schemas=schemas,
    )


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_corpus_file(corpus: Corpus, corpus_path) -> None:
    with open(corpus_path, "w", encoding="utf-8", newline="\n") as fh:
        for rollout in corpus.rollouts:
            fh.write(_dumps(rollout.to_json()))
            fh.write("\n")


def write_corpus(corpus: Corpus, corpus_path, vocab_path) -> None:
    write_corpus_file(corpus, corpus_path)
    with open(vocab_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_dumps(corpus.vocab))
        fh.write("\n")


def load_corpus(corpus_path, vocab_path, schemas=None, db_seed: int = 7) -> Corpus:
    if schemas is None:
        schemas = default_schema_set(db_seed)
    with open(vocab_path, encoding="utf-8") as fh:
        vocab = json.load(fh)
    rollouts = []
    with open(corpus_path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rollouts.append(Rollout.from_json(json.loads(line)))
    return Corpus(
        rollouts=rollouts,
        vocab=vocab,
        seed=-1,
        fingerprint=schema_fingerprint(schemas),
        schemas=schemas,
    )
