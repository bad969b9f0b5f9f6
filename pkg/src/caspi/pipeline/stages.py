"""File-mediated pipeline stages.

Every stage reads its predecessors' artifacts (digest-checked), writes its
outputs atomically, and appends a manifest entry, so any stage can be rerun
or swapped (human labels slot in between train-baselines and train-reward).
"""

import io
import json
from pathlib import Path

import numpy as np

from caspi.dialmetrics import report_dict
from caspi.policy import PolicyModel, evaluate_policy, predict_split, train_policy
from caspi.prefreward import (
    HumanPair,
    RewardModel,
    annotate_corpus,
    harvest,
    kfold_split,
    load_dp,
    train_reward,
    write_dp,
)
from caspi.toywoz import (
    act_vocabulary,
    default_schema_set,
    generate_corpus,
    load_corpus,
    write_corpus,
)
from caspi.toywoz.corpus import write_corpus_file

from .manifest import Manifest, atomic_output, atomic_write_text, stage_timer

CORPUS = "corpus.jsonl"
VOCAB = "vocab.json"
DP = "dp.jsonl"
HARVEST_LOG = "harvest_log.json"
REWARD_CKPT = "reward.ckpt"
REWARD_META = "reward.meta.json"
REWARD_LOG = "reward_log.json"
ANNOTATED = "corpus.annotated.jsonl"
HITL_POOL = "hitl_pool.jsonl"
LABELS = "labels.jsonl"


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _load_corpus(workdir, config, annotated=False):
    schemas = default_schema_set(config.raw["env"]["db_seed"])
    name = ANNOTATED if annotated else CORPUS
    return load_corpus(Path(workdir) / name, Path(workdir) / VOCAB, schemas)


def policy_artifact(mode: str, seed: int) -> str:
    return f"policy_{mode}_s{seed}.ckpt"


def report_artifact(mode: str, seed: int) -> str:
    return f"report_{mode}_s{seed}.json"


def trace_artifact(mode: str, seed: int) -> str:
    return f"trace_{mode}_s{seed}.jsonl"


def stage_gen_corpus(workdir, config, seed: int):
    workdir = Path(workdir)
    manifest = Manifest(workdir)
    elapsed = stage_timer()
    corpus = generate_corpus(config.env_config(), seed)
    with atomic_output(workdir / CORPUS) as tmp_c:
        with atomic_output(workdir / VOCAB) as tmp_v:
            write_corpus(corpus, tmp_c, tmp_v)
    manifest.record("gen-corpus", config.digest(), seed, {}, [CORPUS, VOCAB], elapsed())
    return corpus


def stage_train_baselines(workdir, config, seed: int):
    workdir = Path(workdir)
    manifest = Manifest(workdir)
    inputs = manifest.require_inputs("train-baselines", [CORPUS, VOCAB])
    elapsed = stage_timer()
    corpus = _load_corpus(workdir, config)
    folds_cfg = config.raw["folds"]
    spec = kfold_split(
        corpus, folds_cfg["k"], seed, train_fraction=folds_cfg["train_fraction"]
    )
    result = harvest(
        corpus,
        spec,
        config.baseline_config(),
        config.metric_config(),
        epochs=folds_cfg["epochs"],
        decode_seed=seed,
    )
    with atomic_output(workdir / DP) as tmp:
        write_dp(result.scored, tmp)
    scores = [s.score for s in result.scored]
    log = {
        "n_scored": len(result.scored),
        "aborted_folds": result.aborted_folds,
        "mean_score": float(np.mean(scores)) if scores else None,
        "k": spec.k,
        "epochs": folds_cfg["epochs"],
    }
    atomic_write_text(workdir / HARVEST_LOG, _dump(log))
    manifest.record(
        "train-baselines", config.digest(), seed, inputs, [DP, HARVEST_LOG], elapsed()
    )
    return result


def load_human_pairs(workdir) -> list[HumanPair]:
    """Join the HITL pool with the label journal into training pairs."""
    workdir = Path(workdir)
    pool_path = workdir / HITL_POOL
    labels_path = workdir / LABELS
    if not pool_path.exists() or not labels_path.exists():
        return []
    pool = {}
    with open(pool_path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                task = json.loads(line)
                pool[task["task_id"]] = task
    pairs = []
    with open(labels_path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            label = json.loads(line)
            task = pool.get(label["task_id"])
            if task is None:
                continue
            pairs.append(
                HumanPair(
                    task_id=task["task_id"],
                    dialogue_id=task["dialogue_id"],
                    c1_acts=[tuple(t["acts"]) for t in task["c1_turns"]],
                    c1_responses=[list(t["resp"]) for t in task["c1_turns"]],
                    c2_acts=[tuple(t["acts"]) for t in task["c2_turns"]],
                    c2_responses=[list(t["resp"]) for t in task["c2_turns"]],
                    mu_c1=float(label["mu_c1"]),
                )
            )
    return pairs


def stage_train_reward(workdir, config, seed: int):
    workdir = Path(workdir)
    manifest = Manifest(workdir)
    inputs = manifest.require_inputs("train-reward", [CORPUS, VOCAB, DP])
    elapsed = stage_timer()
    corpus = _load_corpus(workdir, config)
    scored = load_dp(workdir / DP)
    mix_prob = config.raw["reward"]["mix_prob"]
    human_pairs = load_human_pairs(workdir) if mix_prob > 0 else []
    if mix_prob > 0:
        inputs.update(manifest.require_inputs("train-reward", [HITL_POOL, LABELS]))
    model, log = train_reward(
        scored,
        corpus,
        config.reward_config(seed=seed),
        human_pairs=human_pairs,
        mix_prob=mix_prob,
    )
    annotate_corpus(corpus, model)
    with atomic_output(workdir / REWARD_CKPT) as tmp_ckpt:
        with atomic_output(workdir / REWARD_META) as tmp_meta:
            model.save(tmp_ckpt, tmp_meta)
    with atomic_output(workdir / ANNOTATED) as tmp_c:
        write_corpus_file(corpus, tmp_c)
    atomic_write_text(
        workdir / REWARD_LOG,
        _dump(
            {
                "metric_pairs": log.metric_pairs,
                "human_pairs": log.human_pairs,
                "zero_metric_skipped": log.zero_metric_skipped,
                "best_accuracy": log.best_accuracy,
                "steps": log.steps,
                "stopped_early": log.stopped_early,
                "evals": [[s, float(a)] for s, a in log.evals],
                "mix_prob": mix_prob,
            }
        ),
    )
    manifest.record(
        "train-reward",
        config.digest(),
        seed,
        inputs,
        [REWARD_CKPT, REWARD_META, ANNOTATED, REWARD_LOG],
        elapsed(),
    )
    return model, log


def stage_train_policy(workdir, config, seed: int, mode=None, data_fraction=None):
    workdir = Path(workdir)
    manifest = Manifest(workdir)
    cfg = config.policy_config(mode=mode, seed=seed, data_fraction=data_fraction)
    needs_rewards = cfg.mode != "ce_baseline"
    corpus_name = ANNOTATED if needs_rewards else CORPUS
    inputs = manifest.require_inputs("train-policy", [corpus_name, VOCAB])
    elapsed = stage_timer()
    corpus = _load_corpus(workdir, config, annotated=needs_rewards)
    model = train_policy(corpus, cfg)
    ckpt = policy_artifact(cfg.mode, seed)
    meta = ckpt.replace(".ckpt", ".meta.json")
    with atomic_output(workdir / ckpt) as tmp_ckpt:
        with atomic_output(workdir / meta) as tmp_meta:
            model.save(tmp_ckpt, tmp_meta)
    manifest.record(
        "train-policy", config.digest(), seed, inputs, [ckpt, meta], elapsed()
    )
    return model


def load_policy(workdir, config, mode: str, seed: int):
    workdir = Path(workdir)
    corpus = _load_corpus(workdir, config)
    p = config.raw["policy"]
    return PolicyModel.load(
        workdir / policy_artifact(mode, seed),
        corpus.vocab,
        act_vocabulary(corpus.schemas),
        embed_dim=p["embed_dim"],
        hidden=p["hidden"],
        head_hidden=p["head_hidden"],
    ), corpus


def stage_evaluate(workdir, config, seed: int, mode=None):
    workdir = Path(workdir)
    manifest = Manifest(workdir)
    mode = mode or config.raw["policy"]["mode"]
    ckpt = policy_artifact(mode, seed)
    needs_rewards = (workdir / ANNOTATED).exists()
    corpus_name = ANNOTATED if needs_rewards else CORPUS
    inputs = manifest.require_inputs("evaluate", [corpus_name, VOCAB, ckpt])
    elapsed = stage_timer()
    corpus = _load_corpus(workdir, config, annotated=needs_rewards)
    p = config.raw["policy"]
    model = PolicyModel.load(
        workdir / ckpt,
        corpus.vocab,
        act_vocabulary(corpus.schemas),
        embed_dim=p["embed_dim"],
        hidden=p["hidden"],
        head_hidden=p["head_hidden"],
    )
    score, _preds, trace = evaluate_policy(
        model,
        corpus,
        "test",
        config.metric_config(),
        threshold=p["threshold"],
        decode_seed=seed,
        gamma=p["gamma"],
    )
    rep = report_dict(score, len(corpus.split("test")))
    rep["mode"] = mode
    rep["seed"] = seed
    atomic_write_text(workdir / report_artifact(mode, seed), _dump(rep))
    buf = io.StringIO()
    for row in trace:
        buf.write(json.dumps(row, sort_keys=True, separators=(",", ":")))
        buf.write("\n")
    atomic_write_text(workdir / trace_artifact(mode, seed), buf.getvalue())
    manifest.record(
        "evaluate",
        config.digest(),
        seed,
        inputs,
        [report_artifact(mode, seed), trace_artifact(mode, seed)],
        elapsed(),
    )
    return rep


def render_report_table(reports) -> str:
    cols = ["mode", "seed", "inform_pct", "success_pct", "bleu_pct", "combined"]
    rows = [cols] + [
        [str(r.get(c, "")) for c in cols] for r in reports
    ]
    widths = [max(len(row[i]) for row in rows) for i in range(len(cols))]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[j]) for j, cell in enumerate(row)))
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def stage_report(workdir, config, seed: int):
    workdir = Path(workdir)
    manifest = Manifest(workdir)
    reports = []
    for path in sorted(workdir.glob("report_*.json")):
        with open(path, encoding="utf-8") as fh:
            reports.append(json.load(fh))
    if not reports:
        from .manifest import ArtifactError

        raise ArtifactError("report stage found no report_*.json artifacts")
    elapsed = stage_timer()
    atomic_write_text(workdir / "report.txt", render_report_table(reports))
    manifest.record("report", config.digest(), seed, {}, ["report.txt"], elapsed())
    return reports


def goal_summary(goal) -> str:
    parts = []
    for d, dg in sorted(goal.domains.items()):
        bits = [f"{s}={v}" for s, v in sorted(dg.constraints.items())]
        reqs = [s for s in dg.requests if s != "ref"]
        if reqs:
            bits.append("requests: " + ", ".join(sorted(reqs)))
        if dg.book:
            bits.append("book")
        parts.append(f"{d}: " + "; ".join(bits))
    return " | ".join(parts)


def stage_export_hitl(workdir, config, seed: int):
    """Train two baseline seeds and export candidate pairs for labeling."""
    workdir = Path(workdir)
    manifest = Manifest(workdir)
    inputs = manifest.require_inputs("export-hitl", [CORPUS, VOCAB])
    elapsed = stage_timer()
    corpus = _load_corpus(workdir, config)
    h = config.raw["hitl"]
    n_tasks = h["n_tasks"]
    rng = np.random.default_rng(np.random.SeedSequence([seed, 404]))
    train = corpus.split("train")
    picked_idx = sorted(rng.choice(len(train), size=min(n_tasks, len(train)), replace=False).tolist())
    picked = [train[i] for i in picked_idx]

    from dataclasses import replace as dc_replace

    base = config.baseline_config()
    preds = []
    for model_seed in h["model_seeds"]:
        cfg = dc_replace(base, seed=model_seed, epochs=max(2, base.epochs // 2))
        model = train_policy(corpus, cfg)
        preds.append(
            predict_split(model, corpus, "train", threshold=base.threshold,
                          decode_seed=seed, rollouts=picked)
        )

    lines = []
    for i, roll in enumerate(picked):
        task = {
            "task_id": f"task-{i:04d}",
            "dialogue_id": roll.dialogue_id,
            "model_seeds": list(h["model_seeds"]),
            "context": {
                "goal_summary": goal_summary(roll.goal),
                "user_turns": [" ".join(t.user_tokens) for t in roll.turns],
            },
            "c1_turns": [
                {"acts": list(a), "resp": r, "text": " ".join(r)}
                for a, r in zip(preds[0][i].acts, preds[0][i].responses)
            ],
            "c2_turns": [
                {"acts": list(a), "resp": r, "text": " ".join(r)}
                for a, r in zip(preds[1][i].acts, preds[1][i].responses)
            ],
        }
        lines.append(json.dumps(task, sort_keys=True, separators=(",", ":")))
    atomic_write_text(workdir / HITL_POOL, "\n".join(lines) + "\n")
    manifest.record(
        "export-hitl", config.digest(), seed, inputs, [HITL_POOL], elapsed()
    )
    return len(picked)
