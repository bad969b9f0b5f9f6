"""Scripted stochastic expert and rollout data model.

The expert follows a goal agenda (reveal constraints, receive the entity
offer, collect requested slots, book, say goodbye) with stochastic
deviations: batch sizes vary, an extra nicety exchange may follow each
domain, informs may be redundantly repeated, and the entity-offer turn may
proactively answer a request. Optional turns are gated on a slack budget so
a dialogue never exceeds max_turns.
"""

import copy
from dataclasses import dataclass, field

from .acts import BOOKING_SLOT, act_token, answered_pairs, canonical_act, parse_act_token
from .goals import Goal
from .schema import DomainSchema
from .templates import realize_response, realize_user

TURN_NICETY = "nicety"
TURN_INFO = "info"
TURN_TRANSACTION = "transaction"

PLANTED_REWARDS = {TURN_TRANSACTION: 1.0, TURN_INFO: 0.5, TURN_NICETY: 0.05}


@dataclass
class ExpertProfile:
    p_nicety: float = 0.3
    p_redundant: float = 0.15
    p_proactive: float = 0.25
    p_singleton: float = 0.35
    p_split_requests: float = 0.3


@dataclass
class Turn:
    belief: dict
    user_tokens: list[str]
    act_tokens: tuple[str, ...]
    resp_tokens: list[str]
    planted_reward: float
    learned_reward: float | None = None

    def to_json(self):
        data = {
            "belief": self.belief,
            "user_tokens": self.user_tokens,
            "act_tokens": list(self.act_tokens),
            "resp_tokens": self.resp_tokens,
            "planted_reward": self.planted_reward,
        }
        if self.learned_reward is not None:
            data["learned_reward"] = self.learned_reward
        return data

    @classmethod
    def from_json(cls, data) -> "Turn":
        return cls(
            belief=data["belief"],
            user_tokens=list(data["user_tokens"]),
            act_tokens=tuple(data["act_tokens"]),
            resp_tokens=list(data["resp_tokens"]),
            planted_reward=float(data["planted_reward"]),
            learned_reward=data.get("learned_reward"),
        )


@dataclass
class Rollout:
    dialogue_id: str
    split: str
    goal: Goal
    turns: list[Turn] = field(default_factory=list)
    outcome: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "id": self.dialogue_id,
            "split": self.split,
            "goal": self.goal.to_json(),
            "turns": [t.to_json() for t in self.turns],
            "outcome": self.outcome,
        }

    @classmethod
    def from_json(cls, data) -> "Rollout":
        return cls(
            dialogue_id=data["id"],
            split=data["split"],
            goal=Goal.from_json(data["goal"]),
            turns=[Turn.from_json(t) for t in data["turns"]],
            outcome=dict(data["outcome"]),
        )


def turn_category(act_tokens) -> str:
    """Reward tier of a turn: the booking transaction itself, task-content
    informs, or filler (niceties, requests, the booking offer, goodbyes)."""
    types = {parse_act_token(t)[0] for t in act_tokens}
    if "book_confirm" in types:
        return TURN_TRANSACTION
    if "inform" in types:
        return TURN_INFO
    return TURN_NICETY


def belief_snapshot(constraints: dict, schemas: dict[str, DomainSchema]) -> dict:
    """Belief as stored on a turn: per-domain constraints plus DB bucket."""
    return {
        d: {
            "constraints": dict(sorted(cons.items())),
            "bucket": schemas[d].bucket(cons),
        }
        for d, cons in sorted(constraints.items())
        if cons
    }


def simulate_dialogue(
    goal: Goal,
    schemas: dict[str, DomainSchema],
    profile: ExpertProfile,
    rng,
    max_turns: int = 13,
    dialogue_id: str = "dlg",
    split: str = "train",
) -> Rollout:
    domains = list(goal.domains)
    mandatory = 1  # goodbye
    for d in domains:
        dg = goal.domains[d]
        plain_requests = [s for s in dg.requests if s != BOOKING_SLOT]
        # one constraint exchange per domain (it doubles as the entity
        # offer); stochastic singleton splits borrow from the slack budget
        mandatory += 1
        mandatory += 1 if plain_requests else 0
        mandatory += 2 if dg.book else 0
    slack = max_turns - mandatory
    if slack < 0:
        raise ValueError(f"goal needs {mandatory} turns, over the {max_turns} cap")

    # Reserve nicety insertions first so the opportunity count is exactly
    # the number of active domains.
    niceties = []
    for d in domains:
        want = rng.random() < profile.p_nicety and slack > 0
        niceties.append(want)
        if want:
            slack -= 1

    turns: list[Turn] = []
    constraints: dict[str, dict] = {}
    prev_resp: list[str] = []
    first_turn = True

    def emit(user_parts, agent_tokens):
        nonlocal prev_resp, first_turn
        act = canonical_act(agent_tokens)
        belief = belief_snapshot(constraints, schemas)
        user_tokens = realize_user(user_parts, rng)
        resp_tokens = realize_response(act, rng)
        turns.append(
            Turn(
                belief=belief,
                user_tokens=user_tokens,
                act_tokens=act,
                resp_tokens=resp_tokens,
                planted_reward=PLANTED_REWARDS[turn_category(act)],
                learned_reward=None,
            )
        )
        prev_resp = resp_tokens
        first_turn = False

    for idx, d in enumerate(domains):
        dg = goal.domains[d]
        schema = schemas[d]
        cons = list(dg.constraints.items())
        order = rng.permutation(len(cons))
        cons = [cons[i] for i in order]
        requests = [s for s in dg.requests if s != BOOKING_SLOT]
        if len(requests) > 1:
            req_order = rng.permutation(len(requests))
            requests = [requests[i] for i in req_order]
        constraints.setdefault(d, {})

        i = 0
        domain_intro = True
        while i < len(cons):
            # default: reveal everything left (so the act is predictable
            # from the utterance); a split withholds all but one
            take = len(cons) - i
            if take > 1 and slack > 0 and rng.random() < profile.p_singleton:
                take = 1
                slack -= 1
            batch = cons[i : i + take]
            i += take
            parts = []
            if first_turn:
                parts.append(("greet", "", "", ""))
            if domain_intro:
                parts.append(("find", d, "", ""))
                domain_intro = False
            for slot, value in batch:
                parts.append(("constraint", d, slot, value))
            constraints[d].update(batch)
            if i < len(cons):
                agent = [act_token("request", d, cons[i][0])]
            else:
                agent = [act_token("inform", d, "name")]
                if requests and rng.random() < profile.p_proactive:
                    agent.append(act_token("inform", d, requests.pop(0)))
                if rng.random() < profile.p_redundant:
                    echo = sorted(constraints[d])[int(rng.integers(len(constraints[d])))]
                    agent.append(act_token("inform", d, echo))
            emit(parts, agent)

        if requests:
            batches = [requests]
            if len(requests) > 1 and slack > 0 and rng.random() < profile.p_split_requests:
                batches = [requests[:1], requests[1:]]
                slack -= 1
            for rb in batches:
                parts = [("request", d, s, "") for s in rb]
                agent = [act_token("inform", d, s) for s in rb]
                if rng.random() < profile.p_redundant:
                    echo = sorted(constraints[d])[int(rng.integers(len(constraints[d])))]
                    agent.append(act_token("inform", d, echo))
                emit(parts, agent)

        if dg.book:
            emit([("request_book", d, "", "")], [act_token("offer_book", d)])
            emit(
                [("affirm", d, "", "")],
                [act_token("book_confirm", d), act_token("inform", d, BOOKING_SLOT)],
            )

        if niceties[idx]:
            emit([("thank", d, "", "")], [act_token("nicety")])

    emit([("goodbye", "", "", "")], [act_token("goodbye")])
    assert len(turns) <= max_turns

    rollout = Rollout(dialogue_id=dialogue_id, split=split, goal=goal, turns=turns)
    rollout.outcome = evaluate_outcome(rollout, schemas)
    return rollout


def evaluate_outcome(rollout: Rollout, schemas: dict[str, DomainSchema]) -> dict:
    """Recompute the terminal outcome from the turn list alone.

    An entity counts as offered for a domain when some turn informs its name
    and the first DB match under that turn's belief also satisfies the goal
    constraints. Answered slots are requested (domain, slot) pairs informed
    anywhere; booking completes when book_confirm does not precede offer_book.
    """
    goal = rollout.goal
    offered = {}
    for d in goal.active():
        goal_names = {e["name"] for e in schemas[d].matches(goal.domains[d].constraints)}
        ok = False
        for turn in rollout.turns:
            if act_token("inform", d, "name") not in turn.act_tokens:
                continue
            belief_cons = turn.belief.get(d, {}).get("constraints", {})
            hits = schemas[d].matches(belief_cons)
            if hits and hits[0]["name"] in goal_names:
                ok = True
                break
        offered[d] = ok

    booked = {}
    for d in goal.active():
        if not goal.domains[d].book:
            continue
        offer_at = None
        confirm_at = None
        for i, turn in enumerate(rollout.turns):
            if act_token("offer_book", d) in turn.act_tokens and offer_at is None:
                offer_at = i
            if act_token("book_confirm", d) in turn.act_tokens:
                if offer_at is not None and i >= offer_at:
                    confirm_at = i
                    break
        booked[d] = confirm_at is not None

    all_act_tokens = [tok for turn in rollout.turns for tok in turn.act_tokens]
    answered = goal.requested_pairs() & answered_pairs(all_act_tokens)
    # a booking reference only counts as provided when the booking really
    # completed (confirm after offer); the bare inform token is not enough
    answered = {
        (d, s)
        for d, s in answered
        if s != BOOKING_SLOT or booked.get(d, False)
    }

    return {
        "entity_offered": all(offered.values()) if offered else False,
        "answered": sorted(f"{d}:{s}" for d, s in answered),
        "booking_completed": all(booked.values()) if booked else True,
    }
