"""Command-line entry point: caspi <stage> --config <path> [--seed N] [--out DIR]."""

import json
import sys
from pathlib import Path

import click

from .config import DEFAULT_CONFIG, ConfigError, PipelineConfig
from .manifest import ArtifactError, workdir_lock
from . import stages
from .sweep import run_sweep

EXIT_CONFIG_ERROR = 2
EXIT_MISSING_ARTIFACT = 3


def _load_config(path):
    if path is None:
        return PipelineConfig()
    return PipelineConfig.from_file(path)


def _run(stage_fn, config_path, seed, out, **kw):
    try:
        config = _load_config(config_path)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG_ERROR)
    workdir = Path(out)
    workdir.mkdir(parents=True, exist_ok=True)
    try:
        with workdir_lock(workdir):
            return stage_fn(workdir, config, seed, **kw)
    except ArtifactError as exc:
        click.echo(f"artifact error: {exc}", err=True)
        sys.exit(EXIT_MISSING_ARTIFACT)


def _common(f):
    f = click.option("--config", "config_path", type=click.Path(), default=None,
                     help="Pipeline config JSON (defaults apply if omitted).")(f)
    f = click.option("--seed", type=int, default=0, show_default=True)(f)
    f = click.option("--out", type=click.Path(), default="runs/default",
                     show_default=True, help="Pipeline working directory.")(f)
    return f


@click.group()
def main():
    """Batch-RL dialogue pipeline: corpus, reward learning, policy, reports."""


@main.command("gen-corpus")
@_common
def gen_corpus(config_path, seed, out):
    corpus = _run(stages.stage_gen_corpus, config_path, seed, out)
    click.echo(f"wrote {len(corpus.rollouts)} dialogues to {out}/{stages.CORPUS}")


@main.command("train-baselines")
@_common
def train_baselines(config_path, seed, out):
    result = _run(stages.stage_train_baselines, config_path, seed, out)
    click.echo(
        f"harvested {len(result.scored)} scored rollouts "
        f"({len(result.aborted_folds)} folds aborted)"
    )


@main.command("train-reward")
@_common
def train_reward_cmd(config_path, seed, out):
    _model, log = _run(stages.stage_train_reward, config_path, seed, out)
    click.echo(
        f"reward trained: val ranking accuracy {log.best_accuracy:.3f} "
        f"({log.metric_pairs} metric pairs, {log.human_pairs} human pairs)"
    )


@main.command("train-policy")
@_common
@click.option("--mode", type=click.Choice(["caspi_full", "det_only", "ce_baseline"]),
              default=None, help="Override the configured loss mode.")
@click.option("--data-fraction", type=float, default=None,
              help="Override the configured training data fraction.")
def train_policy_cmd(config_path, seed, out, mode, data_fraction):
    _run(stages.stage_train_policy, config_path, seed, out,
         mode=mode, data_fraction=data_fraction)
    click.echo("policy checkpoint written")


@main.command("evaluate")
@_common
@click.option("--mode", type=click.Choice(["caspi_full", "det_only", "ce_baseline"]),
              default=None)
def evaluate_cmd(config_path, seed, out, mode):
    rep = _run(stages.stage_evaluate, config_path, seed, out, mode=mode)
    click.echo(json.dumps(rep, sort_keys=True))


@main.command("report")
@_common
def report_cmd(config_path, seed, out):
    _run(stages.stage_report, config_path, seed, out)
    click.echo((Path(out) / "report.txt").read_text())


@main.command("export-hitl")
@_common
def export_hitl_cmd(config_path, seed, out):
    n = _run(stages.stage_export_hitl, config_path, seed, out)
    click.echo(f"exported {n} labeling tasks to {out}/{stages.HITL_POOL}")


@main.command("sweep")
@_common
def sweep_cmd(config_path, seed, out):
    results = _run(lambda w, c, s: run_sweep(w, c), config_path, seed, out)
    click.echo((Path(out) / "sweep.txt").read_text())


@main.command("schema")
def schema_cmd():
    """Print the config schema defaults."""
    click.echo(json.dumps(DEFAULT_CONFIG, sort_keys=True, indent=2))


@main.command("serve-hitl")
@_common
@click.option("--port", type=int, default=None, help="Override configured port.")
def serve_hitl_cmd(config_path, seed, out, port):
    """Serve the labeling API (and UI, when built) over HTTP."""
    try:
        config = _load_config(config_path)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG_ERROR)
    from caspi.hitl import serve

    serve(Path(out), port=port or config.raw["hitl"]["port"])


if __name__ == "__main__":
    main()
