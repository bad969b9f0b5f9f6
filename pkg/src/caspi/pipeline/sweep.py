"""Low-resource ablation: rerun the reward pipeline per data fraction and
seed, train each policy mode on the same subsample, report medians."""

import json
from pathlib import Path

import numpy as np

from caspi.policy import evaluate_policy, subsample_dialogues, train_policy
from caspi.prefreward import annotate_corpus, harvest, train_reward
from caspi.prefreward.folds import Fold, FoldSpec
from caspi.toywoz import default_schema_set, load_corpus

from .manifest import Manifest, atomic_write_text, stage_timer
from .stages import CORPUS, VOCAB, _dump


def _folds_over(ids, k, seed):
    rng = np.random.default_rng(np.random.SeedSequence([seed, k, len(ids)]))
    perm = rng.permutation(len(ids))
    chunks = np.array_split(perm, k)
    folds = []
    for chunk in chunks:
        val = sorted(ids[j] for j in chunk)
        val_set = set(val)
        folds.append(Fold(train_ids=[d for d in ids if d not in val_set], val_ids=val))
    return FoldSpec(k=k, seed=seed, folds=folds)


def _median(values):
    return float(np.median(values)) if values else None


def run_sweep(workdir, config, seeds=None):
    workdir = Path(workdir)
    manifest = Manifest(workdir)
    inputs = manifest.require_inputs("sweep", [CORPUS, VOCAB])
    elapsed = stage_timer()
    schemas = default_schema_set(config.raw["env"]["db_seed"])
    fractions = config.raw["sweep"]["fractions"]
    modes = config.raw["sweep"]["modes"]
    seeds = list(seeds) if seeds is not None else list(config.raw["policy"]["seeds"])
    k = config.raw["folds"]["k"]
    epochs = config.raw["folds"]["epochs"]
    metric_cfg = config.metric_config()

    results = {"fractions": {}, "seeds": seeds, "modes": modes}
    for fraction in fractions:
        corpus = load_corpus(workdir / CORPUS, workdir / VOCAB, schemas)
        train = corpus.split("train")
        n_sub = max(1, int(round(len(train) * fraction)))
        cell = {"cells": {m: {"per_seed": []} for m in modes}, "skipped": None}
        results["fractions"][str(fraction)] = cell
        if n_sub < k:
            cell["skipped"] = (
                f"fraction {fraction} yields {n_sub} dialogues, fewer than k={k}"
            )
            continue
        for seed in seeds:
            sub = subsample_dialogues(train, fraction, seed)
            needs_rewards = any(m != "ce_baseline" for m in modes)
            if needs_rewards:
                spec = _folds_over([r.dialogue_id for r in sub], k, seed)
                harvested = harvest(
                    corpus, spec, config.baseline_config(), metric_cfg,
                    epochs=epochs, decode_seed=seed,
                )
                reward_model, _ = train_reward(
                    harvested.scored, corpus, config.reward_config(seed=seed)
                )
                annotate_corpus(corpus, reward_model)
            for mode in modes:
                cfg = config.policy_config(mode=mode, seed=seed, data_fraction=1.0)
                model = train_policy(corpus, cfg, rollouts=sub)
                score, _, _ = evaluate_policy(
                    model, corpus, "test", metric_cfg,
                    threshold=cfg.threshold, decode_seed=seed, gamma=cfg.gamma,
                )
                cell["cells"][mode]["per_seed"].append(
                    {
                        "seed": seed,
                        "inform": score.inform,
                        "success": score.success,
                        "bleu": score.bleu,
                        "combined": score.combined,
                    }
                )
        for mode in modes:
            rows = cell["cells"][mode]["per_seed"]
            cell["cells"][mode]["median"] = {
                key: _median([r[key] for r in rows])
                for key in ("inform", "success", "bleu", "combined")
            }
        if "caspi_full" in modes and "ce_baseline" in modes:
            caspi = {r["seed"]: r["success"] for r in cell["cells"]["caspi_full"]["per_seed"]}
            base = {r["seed"]: r["success"] for r in cell["cells"]["ce_baseline"]["per_seed"]}
            deltas = [caspi[s] - base[s] for s in caspi]
            cell["comparison"] = {
                "caspi_wins": int(sum(d > 0 for d in deltas)),
                "n_seeds": len(deltas),
                "median_improvement": _median(deltas),
                "success_deltas": deltas,
            }

    atomic_write_text(workdir / "sweep.json", _dump(results))
    atomic_write_text(workdir / "sweep.txt", render_sweep_table(results))
    manifest.record(
        "sweep", config.digest(), seeds[0], inputs, ["sweep.json", "sweep.txt"], elapsed()
    )
    return results


def render_sweep_table(results) -> str:
    lines = []
    header = f"{'fraction':>8}  {'mode':<12} {'inform':>7} {'success':>8} {'bleu':>7} {'combined':>9}"
    lines.append(header)
    lines.append("-" * len(header))
    for fraction, cell in results["fractions"].items():
        if cell.get("skipped"):
            lines.append(f"{fraction:>8}  skipped: {cell['skipped']}")
            continue
        for mode, data in cell["cells"].items():
            med = data["median"]
            lines.append(
                f"{fraction:>8}  {mode:<12} {med['inform']*100:7.1f} "
                f"{med['success']*100:8.1f} {med['bleu']*100:7.2f} {med['combined']:9.2f}"
            )
        comp = cell.get("comparison")
        if comp:
            lines.append(
                f"{'':>8}  caspi_full beats ce_baseline on success in "
                f"{comp['caspi_wins']}/{comp['n_seeds']} seeds "
                f"(median delta {comp['median_improvement']:+.4f})"
            )
    return "\n".join(lines) + "\n"
