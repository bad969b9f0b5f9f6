import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from caspi.pipeline import (
    ConfigError,
    Manifest,
    PipelineConfig,
    file_digest,
    validate_config,
)
from caspi.pipeline.cli import main

TINY_CONFIG = {
    "env": {"n_train": 16, "n_val": 6, "n_test": 6},
    "folds": {"k": 2, "epochs": 1, "baseline_epochs": 2},
    "reward": {
        "embed_dim": 6, "hidden": 6, "head_dims": [8], "max_epochs": 2,
        "eval_every": 50, "batch_pairs": 4,
    },
    "policy": {"epochs": 2, "seeds": [0], "hidden": 8, "embed_dim": 6,
               "head_hidden": 12},
    "hitl": {"n_tasks": 5},
    "sweep": {"fractions": [0.5], "modes": ["ce_baseline"]},
}


@pytest.fixture(scope="module")
def tiny_config_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "config.json"
    path.write_text(json.dumps(TINY_CONFIG))
    return str(path)


@pytest.fixture(scope="module")
def pipeline_dir(tmp_path_factory, tiny_config_path):
    """One tiny end-to-end pipeline run shared by the read-only tests."""
    out = str(tmp_path_factory.mktemp("run"))
    runner = CliRunner()
    for args in (
        ["gen-corpus", "--config", tiny_config_path, "--out", out],
        ["train-baselines", "--config", tiny_config_path, "--out", out],
        ["train-reward", "--config", tiny_config_path, "--out", out],
        ["train-policy", "--config", tiny_config_path, "--out", out],
        ["evaluate", "--config", tiny_config_path, "--out", out],
        ["train-policy", "--config", tiny_config_path, "--out", out, "--mode", "ce_baseline"],
        ["evaluate", "--config", tiny_config_path, "--out", out, "--mode", "ce_baseline"],
        ["report", "--config", tiny_config_path, "--out", out],
    ):
        result = runner.invoke(main, args, catch_exceptions=False)
        assert result.exit_code == 0, (args, result.output)
    return Path(out)


# -- config --------------------------------------------------------------------


def test_unknown_section_rejected():
    with pytest.raises(ConfigError, match="unknown config section"):
        validate_config({"nope": {}})


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown key env.warp"):
        validate_config({"env": {"warp": 9}})


def test_type_and_range_checked():
    with pytest.raises(ConfigError, match="must be of type"):
        validate_config({"env": {"n_train": "many"}})
    with pytest.raises(ConfigError, match="out of range"):
        validate_config({"metric": {"lambda": -1}})


def test_defaults_merged():
    merged = validate_config({"env": {"n_train": 5}})
    assert merged["env"]["n_train"] == 5
    assert merged["env"]["n_val"] == 500
    assert merged["metric"]["lambda"] == 2.0


def test_digest_whitespace_insensitive(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    a.write_text('{"env": {"n_train": 7}}')
    b.write_text('{\n  "env" : {\n    "n_train" :  7\n  }\n}\n')
    assert PipelineConfig.from_file(a).digest() == PipelineConfig.from_file(b).digest()
    c = tmp_path / "c.json"
    c.write_text('{"env": {"n_train": 8}}')
    assert PipelineConfig.from_file(c).digest() != PipelineConfig.from_file(a).digest()


def test_bad_config_exits_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"env": {"warp": 9}}')
    runner = CliRunner()
    result = runner.invoke(main, ["gen-corpus", "--config", str(bad), "--out", str(tmp_path / "w")])
    assert result.exit_code == 2


def test_missing_artifact_exits_3(tmp_path, tiny_config_path):
    runner = CliRunner()
    result = runner.invoke(
        main, ["train-baselines", "--config", tiny_config_path, "--out", str(tmp_path / "empty")]
    )
    assert result.exit_code == 3
    assert "missing artifact" in result.output


# -- stages -----------------------------------------------------------------------


def test_gen_corpus_deterministic(tmp_path, tiny_config_path):
    runner = CliRunner()
    digests = []
    for tag in ("x", "y"):
        out = tmp_path / tag
        result = runner.invoke(
            main, ["gen-corpus", "--config", tiny_config_path, "--out", str(out)],
            catch_exceptions=False,
        )
        assert result.exit_code == 0
        digests.append((file_digest(out / "corpus.jsonl"), file_digest(out / "vocab.json")))
    assert digests[0] == digests[1]


def test_pipeline_artifacts_exist(pipeline_dir):
    for name in (
        "corpus.jsonl", "vocab.json", "dp.jsonl", "reward.ckpt",
        "reward.meta.json", "corpus.annotated.jsonl",
        "policy_caspi_full_s0.ckpt", "report_caspi_full_s0.json",
        "trace_caspi_full_s0.jsonl", "report.txt",
    ):
        assert (pipeline_dir / name).exists(), name


def test_annotated_corpus_has_learned_rewards(pipeline_dir):
    with open(pipeline_dir / "corpus.annotated.jsonl") as fh:
        first = json.loads(fh.readline())
    assert all("learned_reward" in t for t in first["turns"])
    assert all(0.0 < t["learned_reward"] < 1.0 for t in first["turns"])


def test_dp_cardinality_matches_manifest_config(pipeline_dir):
    with open(pipeline_dir / "harvest_log.json") as fh:
        log = json.load(fh)
    n_lines = sum(1 for line in open(pipeline_dir / "dp.jsonl") if line.strip())
    assert log["n_scored"] == n_lines == 16  # k=2 folds, 1 epoch, 8 val each


def test_report_is_rendered_table(pipeline_dir):
    text = (pipeline_dir / "report.txt").read_text()
    assert "mode" in text and "combined" in text
    assert "caspi_full" in text and "ce_baseline" in text


def test_evaluate_rerun_identical_digest(pipeline_dir, tiny_config_path):
    report = pipeline_dir / "report_caspi_full_s0.json"
    trace = pipeline_dir / "trace_caspi_full_s0.jsonl"
    before = (file_digest(report), file_digest(trace))
    runner = CliRunner()
    result = runner.invoke(
        main, ["evaluate", "--config", tiny_config_path, "--out", str(pipeline_dir)],
        catch_exceptions=False,
    )
    assert result.exit_code == 0
    assert (file_digest(report), file_digest(trace)) == before


def test_trace_rows_carry_returns_and_rewards(pipeline_dir):
    with open(pipeline_dir / "trace_caspi_full_s0.jsonl") as fh:
        row = json.loads(fh.readline())
    assert set(row) == {"dialogue_id", "acts", "responses", "returns", "learned_rewards"}
    assert len(row["acts"]) == len(row["returns"]) == len(row["learned_rewards"])


def test_manifest_covers_all_artifacts(pipeline_dir):
    manifest = Manifest(pipeline_dir)
    produced = set()
    for entry in manifest.entries():
        produced.update(entry["outputs"])
    on_disk = {
        p.name
        for p in pipeline_dir.iterdir()
        if p.name not in ("manifest.jsonl", ".lock") and not p.name.endswith(".tmp")
    }
    assert on_disk <= produced, on_disk - produced


def test_corrupt_artifact_refused(pipeline_dir, tiny_config_path, tmp_path):
    # copy the run dir, corrupt the corpus, expect exit 3 naming the artifact
    import shutil

    broken = tmp_path / "broken"
    shutil.copytree(pipeline_dir, broken)
    (broken / ".lock").unlink(missing_ok=True)
    with open(broken / "corpus.jsonl", "a") as fh:
        fh.write("\n")
    runner = CliRunner()
    result = runner.invoke(
        main, ["train-baselines", "--config", tiny_config_path, "--out", str(broken)]
    )
    assert result.exit_code == 3
    assert "corrupt" in result.output


def test_lock_blocks_second_writer(pipeline_dir, tiny_config_path):
    (pipeline_dir / ".lock").write_text("held")
    try:
        runner = CliRunner()
        result = runner.invoke(
            main, ["report", "--config", tiny_config_path, "--out", str(pipeline_dir)]
        )
        assert result.exit_code == 3
        assert "locked" in result.output
    finally:
        (pipeline_dir / ".lock").unlink()


def test_sweep_skips_underpopulated_fraction(tmp_path, tiny_config_path):
    cfg = json.loads(json.dumps(TINY_CONFIG))
    cfg["sweep"] = {"fractions": [0.05], "modes": ["ce_baseline"]}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "run"
    runner = CliRunner()
    for args in (
        ["gen-corpus", "--config", str(cfg_path), "--out", str(out)],
        ["sweep", "--config", str(cfg_path), "--out", str(out)],
    ):
        result = runner.invoke(main, args, catch_exceptions=False)
        assert result.exit_code == 0, result.output
    data = json.loads((out / "sweep.json").read_text())
    cell = data["fractions"]["0.05"]
    assert "fewer than k" in cell["skipped"]


def test_export_hitl_pool_schema(pipeline_dir, tiny_config_path):
    runner = CliRunner()
    result = runner.invoke(
        main, ["export-hitl", "--config", tiny_config_path, "--out", str(pipeline_dir)],
        catch_exceptions=False,
    )
    assert result.exit_code == 0
    with open(pipeline_dir / "hitl_pool.jsonl") as fh:
        tasks = [json.loads(l) for l in fh if l.strip()]
    assert len(tasks) == 5
    for task in tasks:
        assert set(task) == {"task_id", "dialogue_id", "model_seeds", "context",
                             "c1_turns", "c2_turns"}
        assert len(task["c1_turns"]) == len(task["c2_turns"]) == len(
            task["context"]["user_turns"]
        )


def test_schema_command_prints_defaults():
    runner = CliRunner()
    result = runner.invoke(main, ["schema"], catch_exceptions=False)
    assert result.exit_code == 0
    data = json.loads(result.output)
    assert data["metric"]["lambda"] == 2.0
