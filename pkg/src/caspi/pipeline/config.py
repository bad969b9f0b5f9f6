"""Pipeline configuration: canonical JSON, strict validation, digests."""

import hashlib
import json
from dataclasses import dataclass, field

from caspi.dialmetrics import MetricConfig
from caspi.policy import TrainConfig
from caspi.prefreward import RewardTrainConfig
from caspi.toywoz import EnvConfig, ExpertProfile, GoalConfig


class ConfigError(Exception):
    pass


# (type, validator description) per key; every section rejects unknown keys
SCHEMA = {
    "env": {
        "n_train": ("int", lambda v: v > 0),
        "n_val": ("int", lambda v: v > 0),
        "n_test": ("int", lambda v: v > 0),
        "db_seed": ("int", lambda v: v >= 0),
        "max_turns": ("int", lambda v: 4 <= v <= 40),
        "p_nicety": ("number", lambda v: 0 <= v <= 1),
        "p_redundant": ("number", lambda v: 0 <= v <= 1),
        "p_proactive": ("number", lambda v: 0 <= v <= 1),
        "p_singleton": ("number", lambda v: 0 <= v <= 1),
        "p_split_requests": ("number", lambda v: 0 <= v <= 1),
        "two_domain_prob": ("number", lambda v: 0 <= v <= 1),
        "booking_prob": ("number", lambda v: 0 <= v <= 1),
    },
    "folds": {
        "k": ("int", lambda v: v >= 2),
        "epochs": ("int", lambda v: v >= 1),
        "train_fraction": ("number", lambda v: 0 < v <= 1),
        "baseline_lr": ("number", lambda v: v > 0),
        "baseline_epochs": ("int", lambda v: v >= 1),
        "baseline_batch": ("int", lambda v: v >= 1),
    },
    "metric": {
        "lambda": ("number", lambda v: v >= 0),
        "success_mode": ("str", lambda v: v in ("hard", "soft")),
        "action_form": ("str", lambda v: v in ("act", "resp")),
    },
    "reward": {
        "phi": ("str", lambda v: v in ("identity", "exp")),
        "embed_dim": ("int", lambda v: v >= 2),
        "hidden": ("int", lambda v: v >= 2),
        "head_dims": ("int_list", lambda v: all(d >= 1 for d in v)),
        "lr": ("number", lambda v: v > 0),
        "batch_pairs": ("int", lambda v: v >= 1),
        "max_epochs": ("int", lambda v: v >= 1),
        "eval_every": ("int", lambda v: v >= 1),
        "patience": ("int", lambda v: v >= 1),
        "val_fraction": ("number", lambda v: 0 < v < 1),
        "max_pairs_per_epoch": ("int_or_null", lambda v: v is None or v >= 1),
        "mix_prob": ("number", lambda v: 0 <= v <= 1),
        "seed": ("int", lambda v: v >= 0),
    },
    "policy": {
        "gamma": ("number", lambda v: 0 <= v <= 1),
        "eta": ("number", lambda v: v > 0),
        "beta": ("number", lambda v: v >= 0),
        "mode": ("str", lambda v: v in ("caspi_full", "det_only", "ce_baseline")),
        "data_fraction": ("number", lambda v: 0 < v <= 1),
        "epochs": ("int", lambda v: v >= 1),
        "batch_size": ("int", lambda v: v >= 1),
        "lr": ("number", lambda v: v > 0),
        "alpha": ("number", lambda v: v >= 0),
        "embed_dim": ("int", lambda v: v >= 2),
        "hidden": ("int", lambda v: v >= 2),
        "head_hidden": ("int", lambda v: v >= 2),
        "threshold": ("number", lambda v: 0 <= v < 1),
        "seeds": ("int_list", lambda v: len(v) >= 1),
    },
    "hitl": {
        "n_tasks": ("int", lambda v: v >= 1),
        "model_seeds": ("int_list", lambda v: len(v) == 2),
        "port": ("int", lambda v: 1 <= v <= 65535),
    },
    "sweep": {
        "fractions": ("number_list", lambda v: all(0 < f <= 1 for f in v)),
        "modes": ("str_list", lambda v: all(m in ("caspi_full", "det_only", "ce_baseline") for m in v)),
    },
}

DEFAULT_CONFIG = {
    "env": {
        "n_train": 3000, "n_val": 500, "n_test": 500, "db_seed": 7,
        "max_turns": 13, "p_nicety": 0.3, "p_redundant": 0.15,
        "p_proactive": 0.25, "p_singleton": 0.35, "p_split_requests": 0.3,
        "two_domain_prob": 0.4, "booking_prob": 0.5,
    },
    "folds": {
        "k": 10, "epochs": 5, "train_fraction": 1.0,
        "baseline_lr": 0.02, "baseline_epochs": 5, "baseline_batch": 64,
    },
    "metric": {"lambda": 2.0, "success_mode": "soft", "action_form": "act"},
    "reward": {
        "phi": "identity", "embed_dim": 32, "hidden": 64,
        "head_dims": [128, 64], "lr": 3e-3, "batch_pairs": 16,
        "max_epochs": 8, "eval_every": 40, "patience": 10,
        "val_fraction": 0.1, "max_pairs_per_epoch": 4000, "mix_prob": 0.0,
        "seed": 0,
    },
    "policy": {
        "gamma": 0.9, "eta": 0.1, "beta": 1.0, "mode": "caspi_full",
        "data_fraction": 1.0, "epochs": 30, "batch_size": 64, "lr": 0.01,
        "alpha": 0.1, "embed_dim": 16, "hidden": 24, "head_hidden": 64,
        "threshold": 0.5, "seeds": [0, 1, 2, 3, 4],
    },
    "hitl": {"n_tasks": 40, "model_seeds": [101, 202], "port": 8723},
    "sweep": {"fractions": [0.1], "modes": ["caspi_full", "ce_baseline"]},
}

_TYPE_CHECKS = {
    "int": lambda v: isinstance(v, int) and not isinstance(v, bool),
    "number": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
    "str": lambda v: isinstance(v, str),
    "int_list": lambda v: isinstance(v, list)
    and all(isinstance(x, int) and not isinstance(x, bool) for x in v),
    "number_list": lambda v: isinstance(v, list)
    and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v),
    "str_list": lambda v: isinstance(v, list) and all(isinstance(x, str) for x in v),
    "int_or_null": lambda v: v is None
    or (isinstance(v, int) and not isinstance(v, bool)),
}


def validate_config(data: dict) -> dict:
    """Merge over defaults after strict validation; unknown keys rejected."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    merged = json.loads(json.dumps(DEFAULT_CONFIG))
    for section, entries in data.items():
        if section not in SCHEMA:
            raise ConfigError(f"unknown config section {section!r}")
        if not isinstance(entries, dict):
            raise ConfigError(f"section {section!r} must be an object")
        for key, value in entries.items():
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {section}.{key}")
            kind, check = SCHEMA[section][key]
            if not _TYPE_CHECKS[kind](value):
                raise ConfigError(f"{section}.{key} must be of type {kind}")
            if not check(value):
                raise ConfigError(f"{section}.{key} = {value!r} out of range")
            merged[section][key] = value
    return merged


@dataclass
class PipelineConfig:
    raw: dict = field(default_factory=lambda: validate_config({}))

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls(raw=validate_config(data))

    def digest(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def env_config(self) -> EnvConfig:
        e = self.raw["env"]
        return EnvConfig(
            n_train=e["n_train"],
            n_val=e["n_val"],
            n_test=e["n_test"],
            db_seed=e["db_seed"],
            max_turns=e["max_turns"],
            profile=ExpertProfile(
                p_nicety=e["p_nicety"],
                p_redundant=e["p_redundant"],
                p_proactive=e["p_proactive"],
                p_singleton=e["p_singleton"],
                p_split_requests=e["p_split_requests"],
            ),
            goal=GoalConfig(
                two_domain_prob=e["two_domain_prob"],
                booking_prob=e["booking_prob"],
            ),
        )

    def metric_config(self) -> MetricConfig:
        m = self.raw["metric"]
        return MetricConfig(
            lam=m["lambda"],
            success_mode=m["success_mode"],
            action_form=m["action_form"],
        )

    def reward_config(self, seed=None) -> RewardTrainConfig:
        r = self.raw["reward"]
        return RewardTrainConfig(
            phi=r["phi"],
            action_form=self.raw["metric"]["action_form"],
            embed_dim=r["embed_dim"],
            hidden=r["hidden"],
            head_dims=tuple(r["head_dims"]),
            lr=r["lr"],
            batch_pairs=r["batch_pairs"],
            max_epochs=r["max_epochs"],
            eval_every=r["eval_every"],
            patience=r["patience"],
            val_fraction=r["val_fraction"],
            max_pairs_per_epoch=r["max_pairs_per_epoch"],
            seed=r["seed"] if seed is None else seed,
        )

    def policy_config(self, mode=None, seed=None, data_fraction=None) -> TrainConfig:
        p = self.raw["policy"]
        return TrainConfig(
            gamma=p["gamma"],
            eta=p["eta"],
            beta=p["beta"],
            mode=p["mode"] if mode is None else mode,
            data_fraction=p["data_fraction"] if data_fraction is None else data_fraction,
            epochs=p["epochs"],
            batch_size=p["batch_size"],
            lr=p["lr"],
            alpha=p["alpha"],
            embed_dim=p["embed_dim"],
            hidden=p["hidden"],
            head_hidden=p["head_hidden"],
            threshold=p["threshold"],
            seed=p["seeds"][0] if seed is None else seed,
        )

    def baseline_config(self) -> TrainConfig:
        f = self.raw["folds"]
        p = self.raw["policy"]
        return TrainConfig(
            mode="ce_baseline",
            epochs=f["baseline_epochs"],
            batch_size=f["baseline_batch"],
            lr=f["baseline_lr"],
            embed_dim=p["embed_dim"],
            hidden=p["hidden"],
            head_hidden=p["head_hidden"],
            threshold=p["threshold"],
            seed=0,
        )
