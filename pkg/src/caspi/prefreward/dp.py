"""Scored-rollout preference dataset and its JSONL persistence."""

import json
from dataclasses import dataclass, field


@dataclass
class ScoredRollout:
    dialogue_id: str
    fold: int
    epoch: int
    acts: list[tuple[str, ...]]
    responses: list[list[str]]
    metric: dict  # inform, success, bleu, M

    @property
    def score(self) -> float:
        return float(self.metric["M"])

    def identity(self) -> tuple:
        return (self.dialogue_id, self.fold, self.epoch)

    def to_json(self):
        return {
            "dialogue_id": self.dialogue_id,
            "fold": self.fold,
            "epoch": self.epoch,
            "acts": [list(a) for a in self.acts],
            "responses": self.responses,
            "metric": self.metric,
        }

    @classmethod
    def from_json(cls, data) -> "ScoredRollout":
        return cls(
            dialogue_id=data["dialogue_id"],
            fold=int(data["fold"]),
            epoch=int(data["epoch"]),
            acts=[tuple(a) for a in data["acts"]],
            responses=[list(r) for r in data["responses"]],
            metric=dict(data["metric"]),
        )


@dataclass
class HumanPair:
    """A candidate pair with a human preference target for candidate 1."""

    task_id: str
    dialogue_id: str
    c1_acts: list[tuple[str, ...]]
    c1_responses: list[list[str]]
    c2_acts: list[tuple[str, ...]]
    c2_responses: list[list[str]]
    mu_c1: float = 0.5


def write_dp(scored, path) -> None:
    ordered = sorted(scored, key=lambda s: (s.fold, s.epoch, s.dialogue_id))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s in ordered:
            fh.write(json.dumps(s.to_json(), sort_keys=True, separators=(",", ":")))
            fh.write("\n")


def load_dp(path) -> list[ScoredRollout]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(ScoredRollout.from_json(json.loads(line)))
    return out
