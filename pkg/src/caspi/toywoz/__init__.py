"""Synthetic multi-domain dialogue environment and offline corpus generator."""

from .acts import (
    act_token,
    act_vocabulary,
    answered_pairs,
    canonical_act,
    parse_act_token,
)
from .corpus import (
    Corpus,
    EnvConfig,
    belief_key,
    belief_tokens,
    build_vocabulary,
    derived_rng,
    generate_corpus,
    goal_tokens,
    load_corpus,
    write_corpus,
)
from .goals import DomainGoal, Goal, GoalConfig, sample_goal
from .schema import (
    BOOKING_SLOT,
    DomainSchema,
    SchemaError,
    default_schema_set,
    schema_fingerprint,
)
from .simulator import (
    PLANTED_REWARDS,
    ExpertProfile,
    Rollout,
    Turn,
    evaluate_outcome,
    simulate_dialogue,
    turn_category,
)
from .templates import TemplateError, realize_response, realize_user

__all__ = [
    "BOOKING_SLOT",
    "Corpus",
    "DomainGoal",
    "DomainSchema",
    "EnvConfig",
    "ExpertProfile",
    "Goal",
    "GoalConfig",
    "PLANTED_REWARDS",
    "Rollout",
    "SchemaError",
    "TemplateError",
    "Turn",
    "act_token",
    "act_vocabulary",
    "answered_pairs",
    "belief_key",
    "belief_tokens",
    "build_vocabulary",
    "canonical_act",
    "default_schema_set",
    "derived_rng",
    "evaluate_outcome",
    "generate_corpus",
    "goal_tokens",
    "load_corpus",
    "parse_act_token",
    "realize_response",
    "realize_user",
    "sample_goal",
    "schema_fingerprint",
    "simulate_dialogue",
    "turn_category",
    "write_corpus",
]
