from types import SimpleNamespace

import pytest

from caspi.dialmetrics import (
    MetricConfig,
    MetricsError,
    PredictedDialogue,
    combined_score,
    dialogue_success,
    evaluate_predictions,
    inform_rate,
    report_dict,
    score_dialogue,
    success_rate,
    training_metric,
)
from caspi.toywoz import EnvConfig, ExpertProfile, generate_corpus
from test_bleu import oracle_bleu


def fake_dialogue(requested, answered, offered=True):
    goal = SimpleNamespace(requested_pairs=lambda: set(requested))
    outcome = {
        "entity_offered": offered,
        "answered": sorted(f"{d}:{s}" for d, s in answered),
        "booking_completed": True,
    }
    return SimpleNamespace(goal=goal, outcome=outcome)


def small_corpus(seed=21, n=20):
    return generate_corpus(EnvConfig(n_train=n, n_val=5, n_test=5), seed=seed)


# -- inform / success ----------------------------------------------------------


def test_inform_rate_all_true_and_all_false():
    good = [fake_dialogue(set(), set(), offered=True)] * 4
    bad = [fake_dialogue(set(), set(), offered=False)] * 4
    assert inform_rate(good) == 1.0
    assert inform_rate(bad) == 0.0


def test_inform_rate_mixed_count():
    ds = [fake_dialogue(set(), set(), offered=(i < 7)) for i in range(10)]
    assert inform_rate(ds) == pytest.approx(0.7)


def test_inform_rate_empty_rejected():
    with pytest.raises(MetricsError):
        inform_rate([])


def test_success_two_of_four_requests():
    req = {("r", "a"), ("r", "b"), ("r", "c"), ("r", "d")}
    ans = {("r", "a"), ("r", "b")}
    d = fake_dialogue(req, ans)
    assert dialogue_success(d.goal, d.outcome, "hard") == 0.0
    assert dialogue_success(d.goal, d.outcome, "soft") == 0.5


def test_success_all_answered_both_modes():
    req = {("r", "a"), ("r", "b")}
    d = fake_dialogue(req, req)
    assert dialogue_success(d.goal, d.outcome, "hard") == 1.0
    assert dialogue_success(d.goal, d.outcome, "soft") == 1.0


def test_success_rate_three_dialogue_set():
    req = {("r", "a"), ("r", "b")}
    ds = [
        fake_dialogue(req, req),
        fake_dialogue(req, {("r", "a")}),
        fake_dialogue(req, set()),
    ]
    assert success_rate(ds, "soft") == pytest.approx(0.5)
    assert success_rate(ds, "hard") == pytest.approx(1 / 3)


def test_zero_request_dialogue_counts_full_success():
    d = fake_dialogue(set(), set())
    assert dialogue_success(d.goal, d.outcome, "hard") == 1.0
    assert dialogue_success(d.goal, d.outcome, "soft") == 1.0


def test_hard_never_exceeds_soft():
    import numpy as np

    rng = np.random.default_rng(0)
    ds = []
    slots = [("r", s) for s in "abcdef"]
    for _ in range(50):
        req = {slots[i] for i in rng.choice(6, size=rng.integers(1, 5), replace=False)}
        ans = {s for s in req if rng.random() < 0.6}
        ds.append(fake_dialogue(req, ans))
    assert success_rate(ds, "hard") <= success_rate(ds, "soft")


# -- combined score -------------------------------------------------------------


def test_combined_score_reference_rows():
    assert combined_score(96.8, 87.3, 19.10) == pytest.approx(111.15, abs=0.01)
    assert combined_score(89.2, 77.9, 18.6) == pytest.approx(102.15, abs=0.01)
    assert combined_score(0, 0, 0) == 0.0


# -- per-dialogue training metric -------------------------------------------------


def test_perfect_prediction_scores_two_plus_lambda():
    corpus = small_corpus()
    ref = corpus.split("train")[0]
    pred = PredictedDialogue(
        dialogue_id=ref.dialogue_id,
        acts=[t.act_tokens for t in ref.turns],
        responses=[list(t.resp_tokens) for t in ref.turns],
    )
    for lam in (0.0, 1.0, 2.0):
        cfg = MetricConfig(lam=lam, success_mode="soft", action_form="act")
        score = training_metric([pred], corpus, cfg)[ref.dialogue_id]
        assert score.training_metric == pytest.approx(2.0 + lam, abs=1e-9)


def test_empty_prediction_scores_floor():
    corpus = small_corpus()
    ref = next(r for r in corpus.split("train") if r.goal.requested_pairs())
    pred = PredictedDialogue(
        dialogue_id=ref.dialogue_id,
        acts=[() for _ in ref.turns],
        responses=[[] for _ in ref.turns],
    )
    cfg = MetricConfig(lam=2.0, success_mode="soft", action_form="act")
    score = training_metric([pred], corpus, cfg)[ref.dialogue_id]
    assert score.inform == 0.0
    assert score.success == 0.0
    assert score.bleu == 0.0  # empty hypotheses: zero length, BLEU floor is 0


def test_partial_prediction_metric_composition():
    # keep name-offer and exactly one of two requested informs: inform=1,
    # soft success=0.5, M = 1.5 + lam * b with b from the independent oracle
    corpus = small_corpus(seed=33, n=60)
    ref = None
    for cand in corpus.split("train"):
        reqs = [
            (d, s)
            for d, s in cand.goal.requested_pairs()
            if s != "ref"
        ]
        if len(cand.goal.domains) == 1 and len(reqs) == 2 and not any(
            dg.book for dg in cand.goal.domains.values()
        ):
            ref = cand
            break
    assert ref is not None
    drop_domain, drop_slot = sorted(ref.goal.requested_pairs())[0]
    drop_tok = f"inform-{drop_domain}-{drop_slot}"
    acts = [
        tuple(t for t in turn.act_tokens if t != drop_tok) or ("nicety-none-none",)
        for turn in ref.turns
    ]
    pred = PredictedDialogue(dialogue_id=ref.dialogue_id, acts=acts)
    cfg = MetricConfig(lam=2.0, success_mode="soft", action_form="act")
    score = training_metric([pred], corpus, cfg)[ref.dialogue_id]
    b = oracle_bleu([list(a) for a in acts], [list(t.act_tokens) for t in ref.turns])
    assert score.inform == 1.0
    assert score.success == pytest.approx(0.5)
    assert score.training_metric == pytest.approx(1.5 + 2.0 * b, rel=1e-9)


def test_unknown_dialogue_id_rejected():
    corpus = small_corpus()
    pred = PredictedDialogue(dialogue_id="nope-0000", acts=[])
    with pytest.raises(MetricsError, match="unknown dialogue id"):
        training_metric([pred], corpus, MetricConfig())


def test_metric_monotone_in_components():
    cfg = MetricConfig(lam=2.0)
    from caspi.dialmetrics import MetricScore

    base = MetricScore(0.5, 0.5, 0.5, cfg.lam, "soft").training_metric
    assert MetricScore(0.6, 0.5, 0.5, cfg.lam, "soft").training_metric > base
    assert MetricScore(0.5, 0.6, 0.5, cfg.lam, "soft").training_metric > base
    assert MetricScore(0.5, 0.5, 0.6, cfg.lam, "soft").training_metric > base


def test_resp_action_form_uses_response_tokens():
    corpus = small_corpus()
    ref = corpus.split("train")[0]
    pred = PredictedDialogue(
        dialogue_id=ref.dialogue_id,
        acts=[t.act_tokens for t in ref.turns],
        responses=[["wrong", "words"] for _ in ref.turns],
    )
    act_cfg = MetricConfig(lam=2.0, action_form="act")
    resp_cfg = MetricConfig(lam=2.0, action_form="resp")
    act_score = training_metric([pred], corpus, act_cfg)[ref.dialogue_id]
    resp_score = training_metric([pred], corpus, resp_cfg)[ref.dialogue_id]
    assert act_score.bleu == pytest.approx(1.0)
    assert resp_score.bleu < 0.5


def test_expert_corpus_near_perfect_under_hard_success():
    corpus = generate_corpus(
        EnvConfig(n_train=80, n_val=10, n_test=10, profile=ExpertProfile()), seed=4
    )
    train = corpus.split("train")
    assert inform_rate(train) >= 0.9
    assert success_rate(train, "hard") >= 0.9


def test_corpus_level_evaluation_and_report():
    corpus = small_corpus()
    preds = [
        PredictedDialogue(
            dialogue_id=r.dialogue_id,
            acts=[t.act_tokens for t in r.turns],
            responses=[list(t.resp_tokens) for t in r.turns],
        )
        for r in corpus.split("test")
    ]
    score = evaluate_predictions(preds, corpus, MetricConfig(lam=2.0))
    assert score.inform == 1.0 and score.success == 1.0
    assert score.bleu == pytest.approx(1.0)
    assert score.combined == pytest.approx(200.0)
    rep = report_dict(score, len(preds))
    assert set(rep) == {
        "inform_pct",
        "success_pct",
        "success_mode",
        "bleu_pct",
        "combined",
        "lambda",
        "n_dialogues",
        "seed_protocol",
    }
    assert rep["seed_protocol"] == "median of 5 runs"


def test_invalid_config_rejected():
    with pytest.raises(MetricsError):
        MetricConfig(lam=float("nan"))
    with pytest.raises(MetricsError):
        MetricConfig(success_mode="fuzzy")
    with pytest.raises(MetricsError):
        MetricConfig(action_form="belief")
