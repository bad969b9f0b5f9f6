"""Multi-domain dialogue environment schemas and entity databases."""

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

# Query-result buckets mirror a one-hot DB-result encoding:
# none=0, one=1, few=2..5, many=6+.
BUCKET_NONE = "<db_none>"
BUCKET_ONE = "<db_one>"
BUCKET_FEW = "<db_few>"
BUCKET_MANY = "<db_many>"

BOOKING_SLOT = "ref"


class SchemaError(Exception):
    pass


@dataclass
class DomainSchema:
    name: str
    informable: dict[str, list[str]]
    requestable: list[str]
    bookable: bool
    entities: list[dict[str, str]] = field(default_factory=list)

    def __post_init__(self):
        for ent in self.entities:
            for slot in self.informable:
                if slot not in ent:
                    raise SchemaError(
                        f"entity {ent.get('name')!r} in domain {self.name!r} "
                        f"missing informable slot {slot!r}"
                    )

    def matches(self, constraints: dict[str, str]) -> list[dict[str, str]]:
        """Entities consistent with the constraints, sorted by name."""
        out = [
            e
            for e in self.entities
            if all(e.get(s) == v for s, v in constraints.items())
        ]
        return sorted(out, key=lambda e: e["name"])

    def bucket(self, constraints: dict[str, str]) -> str:
        n = len(self.matches(constraints))
        if n == 0:
            return BUCKET_NONE
        if n == 1:
            return BUCKET_ONE
        if n <= 5:
            return BUCKET_FEW
        return BUCKET_MANY


_DOMAIN_SPECS = {
    "restaurant": dict(
        informable={
            "food": ["italian", "chinese", "indian", "british", "french"],
            "area": ["north", "south", "east", "west", "centre"],
            "pricerange": ["cheap", "moderate", "expensive"],
        },
        requestable=["phone", "address", "postcode", BOOKING_SLOT],
        bookable=True,
        n_entities=20,
    ),
    "hotel": dict(
        informable={
            "area": ["north", "south", "east", "west", "centre"],
            "pricerange": ["cheap", "moderate", "expensive"],
            "stars": ["two", "three", "four", "five"],
        },
        requestable=["phone", "address", "parking", BOOKING_SLOT],
        bookable=True,
        n_entities=20,
    ),
    "taxi": dict(
        informable={
            "destination": ["airport", "station", "museum", "stadium", "harbour"],
            "departure": ["morning", "noon", "evening", "night"],
        },
        requestable=["car", "phone"],
        bookable=False,
        n_entities=12,
    ),
}


def default_schema_set(db_seed: int = 7) -> dict[str, DomainSchema]:
    """Three-domain desk-scale environment with seeded entity databases."""
    rng = np.random.default_rng(db_seed)
    schemas = {}
    for name in sorted(_DOMAIN_SPECS):
        spec = _DOMAIN_SPECS[name]
        entities = []
        for i in range(spec["n_entities"]):
            ent = {"name": f"{name}_{i:02d}"}
            for slot in sorted(spec["informable"]):
                values = spec["informable"][slot]
                ent[slot] = values[int(rng.integers(len(values)))]
            entities.append(ent)
        schemas[name] = DomainSchema(
            name=name,
            informable={k: list(v) for k, v in sorted(spec["informable"].items())},
            requestable=list(spec["requestable"]),
            bookable=spec["bookable"],
            entities=entities,
        )
    return schemas


def schema_fingerprint(schemas: dict[str, DomainSchema]) -> str:
    payload = {
        name: {
            "informable": s.informable,
            "requestable": s.requestable,
            "bookable": s.bookable,
            "entities": s.entities,
        }
        for name, s in sorted(schemas.items())
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]
