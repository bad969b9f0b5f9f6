"""User goal sampling over the schema set."""

from dataclasses import dataclass, field

from .schema import BOOKING_SLOT, DomainSchema, SchemaError


@dataclass
class DomainGoal:
    constraints: dict[str, str]
    requests: list[str]
    book: bool


@dataclass
class Goal:
    domains: dict[str, DomainGoal] = field(default_factory=dict)

    def active(self) -> list[str]:
        return sorted(self.domains)

    def requested_pairs(self) -> set[tuple[str, str]]:
        out = set()
        for name, dg in self.domains.items():
            for slot in dg.requests:
                out.add((name, slot))
        return out

    def to_json(self):
        return {
            name: {
                "constraints": dict(sorted(dg.constraints.items())),
                "requests": sorted(dg.requests),
                "book": dg.book,
            }
            for name, dg in sorted(self.domains.items())
        }

    @classmethod
    def from_json(cls, data) -> "Goal":
        return cls(
            domains={
                name: DomainGoal(
                    constraints=dict(d["constraints"]),
                    requests=list(d["requests"]),
                    book=bool(d["book"]),
                )
                for name, d in data.items()
            }
        )


@dataclass
class GoalConfig:
    two_domain_prob: float = 0.4
    booking_prob: float = 0.5
    max_resample: int = 100
    # request-count distribution over 0, 1, 2 requested slots per domain
    request_count_probs: tuple[float, ...] = (0.15, 0.45, 0.4)
    # distribution when the domain will also be booked
    booked_request_count_probs: tuple[float, ...] = (0.65, 0.35)


def _sample_domain_goal(schema: DomainSchema, rng, cfg: GoalConfig, max_constraints: int):
    slots = sorted(schema.informable)
    for _ in range(cfg.max_resample):
        k = int(rng.integers(1, min(max_constraints, len(slots)) + 1))
        chosen = sorted(rng.choice(len(slots), size=k, replace=False).tolist())
        constraints = {}
        for idx in chosen:
            slot = slots[idx]
            values = schema.informable[slot]
            constraints[slot] = values[int(rng.integers(len(values)))]
        if schema.matches(constraints):
            break
    else:
        raise SchemaError(
            f"domain {schema.name!r} rejected as over-constrained: no satisfiable "
            f"goal found in {cfg.max_resample} draws"
        )
    pool = [s for s in schema.requestable if s != BOOKING_SLOT]
    book = bool(schema.bookable and rng.random() < cfg.booking_prob)
    if book:
        # booking goals concentrate success on the transaction itself
        probs = cfg.booked_request_count_probs
    else:
        probs = cfg.request_count_probs
    n_req = int(rng.choice(len(probs), p=list(probs)))
    n_req = min(n_req, len(pool))
    requests = sorted(
        pool[i] for i in rng.choice(len(pool), size=n_req, replace=False)
    )
    if book:
        requests.append(BOOKING_SLOT)
    return DomainGoal(constraints=constraints, requests=sorted(requests), book=book)


def sample_goal(schemas: dict[str, DomainSchema], rng, cfg: GoalConfig | None = None) -> Goal:
    """Draw a satisfiable goal over 1 or 2 domains.

    Two-domain goals get at most 2 constraints per domain and at most 1
    non-booking request so dialogues fit the turn budget.
    """
    if not schemas:
        raise SchemaError("empty schema set")
    cfg = cfg or GoalConfig()
    names = sorted(schemas)
    two = len(names) > 1 and rng.random() < cfg.two_domain_prob
    count = 2 if two else 1
    picked = [names[i] for i in rng.choice(len(names), size=count, replace=False)]
    goal = Goal()
    for name in picked:
        if two:
            tight = GoalConfig(
                two_domain_prob=cfg.two_domain_prob,
                booking_prob=cfg.booking_prob,
                max_resample=cfg.max_resample,
                request_count_probs=(0.3, 0.7),
            )
            goal.domains[name] = _sample_domain_goal(schemas[name], rng, tight, 2)
        else:
            goal.domains[name] = _sample_domain_goal(schemas[name], rng, cfg, 3)
    return goal
