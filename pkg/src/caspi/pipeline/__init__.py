"""End-to-end orchestration: config, stages, manifests, ablation sweep."""

from .config import DEFAULT_CONFIG, SCHEMA, ConfigError, PipelineConfig, validate_config
from .manifest import (
    ArtifactError,
    Manifest,
    atomic_write_text,
    file_digest,
    workdir_lock,
)
from .stages import (
    ANNOTATED,
    CORPUS,
    DP,
    HITL_POOL,
    LABELS,
    REWARD_CKPT,
    REWARD_META,
    load_human_pairs,
    policy_artifact,
    report_artifact,
    stage_evaluate,
    stage_export_hitl,
    stage_gen_corpus,
    stage_report,
    stage_train_baselines,
    stage_train_policy,
    stage_train_reward,
    trace_artifact,
)
from .sweep import run_sweep

__all__ = [
    "ANNOTATED",
    "ArtifactError",
    "CORPUS",
    "ConfigError",
    "DEFAULT_CONFIG",
    "DP",
    "HITL_POOL",
    "LABELS",
    "Manifest",
    "PipelineConfig",
    "REWARD_CKPT",
    "REWARD_META",
    "SCHEMA",
    "atomic_write_text",
    "file_digest",
    "load_human_pairs",
    "policy_artifact",
    "report_artifact",
    "run_sweep",
    "stage_evaluate",
    "stage_export_hitl",
    "stage_gen_corpus",
    "stage_report",
    "stage_train_baselines",
    "stage_train_policy",
    "stage_train_reward",
    "trace_artifact",
    "validate_config",
    "workdir_lock",
]
