import json
from collections import Counter

import numpy as np
import pytest

from caspi.toywoz import (
    DomainSchema,
    EnvConfig,
    ExpertProfile,
    GoalConfig,
    SchemaError,
    act_token,
    answered_pairs,
    default_schema_set,
    evaluate_outcome,
    generate_corpus,
    parse_act_token,
    realize_response,
    sample_goal,
    simulate_dialogue,
    turn_category,
    write_corpus,
)

SCHEMAS = default_schema_set()
QUIET = ExpertProfile(0.0, 0.0, 0.0, 0.0, 0.0)


def small_env(**kw):
    return EnvConfig(n_train=kw.pop("n_train", 30), n_val=10, n_test=10, **kw)


# -- goals -------------------------------------------------------------------


def test_goal_sampling_deterministic():
    a = sample_goal(SCHEMAS, np.random.default_rng(5))
    b = sample_goal(SCHEMAS, np.random.default_rng(5))
    assert a.to_json() == b.to_json()


def test_goal_satisfiable():
    for seed in range(50):
        goal = sample_goal(SCHEMAS, np.random.default_rng(seed))
        for d, dg in goal.domains.items():
            assert SCHEMAS[d].matches(dg.constraints)


def test_single_entity_schema_constraints_match_that_entity():
    schema = DomainSchema(
        name="shop",
        informable={"color": ["red", "blue"]},
        requestable=["phone"],
        bookable=False,
        entities=[{"name": "shop_00", "color": "red"}],
    )
    goal = sample_goal({"shop": schema}, np.random.default_rng(0), GoalConfig())
    assert goal.domains["shop"].constraints == {"color": "red"}


def test_overconstrained_schema_rejected():
    schema = DomainSchema(
        name="void",
        informable={"x": ["a", "b"], "y": ["c", "d"]},
        requestable=["phone"],
        bookable=False,
        entities=[],
    )
    with pytest.raises(SchemaError, match="over-constrained"):
        sample_goal({"void": schema}, np.random.default_rng(0), GoalConfig())


def test_booking_fraction_matches_config():
    cfg = GoalConfig(booking_prob=0.35)
    rng = np.random.default_rng(17)
    drawn = 0
    booked = 0
    for _ in range(1000):
        goal = sample_goal(SCHEMAS, rng, cfg)
        for d, dg in goal.domains.items():
            if SCHEMAS[d].bookable:
                drawn += 1
                booked += dg.book
    assert abs(booked / drawn - 0.35) <= 0.05


# -- simulator ----------------------------------------------------------------


def test_fixed_rng_identical_rollout():
    goal = sample_goal(SCHEMAS, np.random.default_rng(3))
    a = simulate_dialogue(goal, SCHEMAS, ExpertProfile(), np.random.default_rng(9))
    b = simulate_dialogue(goal, SCHEMAS, ExpertProfile(), np.random.default_rng(9))
    assert a.to_json() == b.to_json()


def test_noise_off_rollout_is_minimal():
    for seed in range(30):
        rng = np.random.default_rng(seed)
        goal = sample_goal(SCHEMAS, rng)
        roll = simulate_dialogue(goal, SCHEMAS, QUIET, rng)
        expected = 1  # goodbye
        for d, dg in goal.domains.items():
            plain = [s for s in dg.requests if s != "ref"]
            expected += 1  # single constraint exchange carrying the offer
            expected += 1 if plain else 0
            expected += 2 if dg.book else 0
        assert len(roll.turns) == expected
        assert roll.turns[0].user_tokens[0] in {"hello", "hi", "good"}
        assert parse_act_token(roll.turns[-1].act_tokens[0])[0] == "goodbye"
        assert not any("nicety-none-none" in t.act_tokens for t in roll.turns)


def test_noise_off_expert_succeeds():
    for seed in range(30):
        rng = np.random.default_rng(100 + seed)
        goal = sample_goal(SCHEMAS, rng)
        roll = simulate_dialogue(goal, SCHEMAS, QUIET, rng)
        assert roll.outcome["entity_offered"]
        assert roll.outcome["booking_completed"]
        answered = {tuple(x.split(":")) for x in roll.outcome["answered"]}
        assert answered == goal.requested_pairs()


def test_nicety_monte_carlo_frequency():
    profile = ExpertProfile(p_nicety=0.3, p_redundant=0.0, p_proactive=0.0,
                            p_singleton=0.0, p_split_requests=0.0)
    rng = np.random.default_rng(12)
    n_nicety = 0
    n_opportunities = 0
    for _ in range(10_000):
        goal = sample_goal(SCHEMAS, rng)
        roll = simulate_dialogue(goal, SCHEMAS, profile, rng)
        n_opportunities += len(goal.domains)
        n_nicety += sum(
            1 for t in roll.turns if t.act_tokens == ("nicety-none-none",)
        )
    ratio = n_nicety / n_opportunities
    assert abs(ratio - 0.3) <= 0.015  # 5% relative


def test_belief_monotone_and_bucket_consistent():
    rng = np.random.default_rng(23)
    for _ in range(40):
        goal = sample_goal(SCHEMAS, rng)
        roll = simulate_dialogue(goal, SCHEMAS, ExpertProfile(), rng)
        prev: dict = {}
        for turn in roll.turns:
            for d, entry in turn.belief.items():
                cons = entry["constraints"]
                before = prev.get(d, {})
                assert all(cons.get(k) == v for k, v in before.items())
                assert entry["bucket"] == SCHEMAS[d].bucket(cons)
            for d in prev:
                assert d in turn.belief
            prev = {d: dict(e["constraints"]) for d, e in turn.belief.items()}


def test_planted_reward_ordering_every_turn():
    rng = np.random.default_rng(31)
    for _ in range(40):
        goal = sample_goal(SCHEMAS, rng)
        roll = simulate_dialogue(goal, SCHEMAS, ExpertProfile(), rng)
        for turn in roll.turns:
            cat = turn_category(turn.act_tokens)
            assert turn.planted_reward == {"transaction": 1.0, "info": 0.5, "nicety": 0.05}[cat]
    assert 1.0 > 0.5 > 0.05


def test_max_turns_respected():
    rng = np.random.default_rng(77)
    for _ in range(200):
        goal = sample_goal(SCHEMAS, rng)
        roll = simulate_dialogue(goal, SCHEMAS, ExpertProfile(0.9, 0.9, 0.9, 0.9, 0.9), rng)
        assert len(roll.turns) <= 13


# -- outcomes ------------------------------------------------------------------


def test_outcome_empty_when_no_informs():
    rng = np.random.default_rng(1)
    goal = sample_goal(SCHEMAS, rng)
    roll = simulate_dialogue(goal, SCHEMAS, QUIET, rng)
    for turn in roll.turns:
        turn.act_tokens = ("nicety-none-none",)
    out = evaluate_outcome(roll, SCHEMAS)
    assert out["answered"] == []
    assert not out["entity_offered"]


def test_outcome_recount_after_dropping_one_inform():
    rng = np.random.default_rng(8)
    goal = None
    while goal is None or not any(
        len([s for s in dg.requests if s != "ref"]) >= 2 for dg in goal.domains.values()
    ):
        goal = sample_goal(SCHEMAS, rng)
    roll = simulate_dialogue(goal, SCHEMAS, QUIET, rng)
    # drop exactly one requested-slot inform act token
    target = None
    for turn in roll.turns:
        for tok in turn.act_tokens:
            act_type, d, slot = parse_act_token(tok)
            if act_type == "inform" and (d, slot) in goal.requested_pairs() and slot != "ref":
                target = (turn, tok)
                break
        if target:
            break
    turn, tok = target
    turn.act_tokens = tuple(t for t in turn.act_tokens if t != tok)
    out = evaluate_outcome(roll, SCHEMAS)
    # brute-force recount over raw act tokens
    flat = [t for tr in roll.turns for t in tr.act_tokens]
    brute = goal.requested_pairs() & answered_pairs(flat)
    assert {tuple(x.split(":")) for x in out["answered"]} == brute
    _, dropped_d, dropped_s = parse_act_token(tok)
    assert (dropped_d, dropped_s) not in brute


def test_outcome_recomputable_from_turns():
    rng = np.random.default_rng(55)
    for _ in range(25):
        goal = sample_goal(SCHEMAS, rng)
        roll = simulate_dialogue(goal, SCHEMAS, ExpertProfile(), rng)
        assert roll.outcome == evaluate_outcome(roll, SCHEMAS)


def test_book_confirm_requires_prior_offer():
    rng = np.random.default_rng(2)
    goal = None
    while goal is None or not any(dg.book for dg in goal.domains.values()):
        goal = sample_goal(SCHEMAS, rng)
    roll = simulate_dialogue(goal, SCHEMAS, QUIET, rng)
    booked = [d for d, dg in goal.domains.items() if dg.book][0]
    for turn in roll.turns:
        if act_token("offer_book", booked) in turn.act_tokens:
            turn.act_tokens = tuple(
                t for t in turn.act_tokens if t != act_token("offer_book", booked)
            ) or ("nicety-none-none",)
    assert not evaluate_outcome(roll, SCHEMAS)["booking_completed"]


# -- realization ----------------------------------------------------------------


def test_realize_deterministic_given_rng_state():
    act = (act_token("inform", "restaurant", "name"),)
    a = realize_response(act, np.random.default_rng(4))
    b = realize_response(act, np.random.default_rng(4))
    assert a == b


def test_realize_variant_frequencies():
    act = (act_token("nicety"),)
    rng = np.random.default_rng(6)
    counts = Counter(tuple(realize_response(act, rng)) for _ in range(1000))
    assert len(counts) == 3
    for c in counts.values():
        assert abs(c / 1000 - 1 / 3) <= 0.05


def test_placeholders_are_delexicalized():
    act = (act_token("inform", "hotel", "name"), act_token("inform", "hotel", "phone"))
    tokens = realize_response(act, np.random.default_rng(0))
    assert "[hotel_name]" in tokens
    assert "[hotel_phone]" in tokens


# -- corpus ----------------------------------------------------------------------


def test_corpus_files_byte_identical(tmp_path):
    cfg = small_env()
    for tag in ("a", "b"):
        corpus = generate_corpus(cfg, seed=11)
        write_corpus(corpus, tmp_path / f"c_{tag}.jsonl", tmp_path / f"v_{tag}.json")
    assert (tmp_path / "c_a.jsonl").read_bytes() == (tmp_path / "c_b.jsonl").read_bytes()
    assert (tmp_path / "v_a.json").read_bytes() == (tmp_path / "v_b.json").read_bytes()


def test_split_sizes_sum_to_total():
    corpus = generate_corpus(small_env(), seed=0)
    assert len(corpus.split("train")) == 30
    assert len(corpus.split("val")) == 10
    assert len(corpus.split("test")) == 10
    assert len(corpus.rollouts) == 50


def test_vocabulary_closed_over_corpus():
    corpus = generate_corpus(small_env(), seed=3)
    from caspi.toywoz import belief_tokens, goal_tokens

    for roll in corpus.rollouts:
        for tok in goal_tokens(roll.goal):
            assert tok in corpus.vocab
        for turn in roll.turns:
            for tok in (
                list(turn.user_tokens)
                + list(turn.resp_tokens)
                + list(turn.act_tokens)
                + belief_tokens(turn.belief)
            ):
                assert tok in corpus.vocab, tok


def test_behavior_stochasticity_observable():
    corpus = generate_corpus(small_env(n_train=100), seed=5)
    from caspi.toywoz import belief_key

    acts_by_belief: dict[str, set] = {}
    for roll in corpus.split("train"):
        for turn in roll.turns:
            acts_by_belief.setdefault(belief_key(turn.belief), set()).add(turn.act_tokens)
    assert any(len(v) >= 2 for v in acts_by_belief.values())


def test_corpus_roundtrip(tmp_path):
    corpus = generate_corpus(small_env(), seed=2)
    write_corpus(corpus, tmp_path / "c.jsonl", tmp_path / "v.json")
    from caspi.toywoz import load_corpus

    again = load_corpus(tmp_path / "c.jsonl", tmp_path / "v.json", corpus.schemas)
    assert len(again.rollouts) == len(corpus.rollouts)
    assert again.vocab == corpus.vocab
    assert [r.to_json() for r in again.rollouts] == [r.to_json() for r in corpus.rollouts]
