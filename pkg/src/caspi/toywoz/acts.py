"""Composite dialogue acts: (type, domain, slot) tokens with a canonical order."""

from .schema import BOOKING_SLOT, DomainSchema

ACT_TYPES = ("nicety", "request", "inform", "offer_book", "book_confirm", "goodbye")
_TYPE_ORDER = {t: i for i, t in enumerate(ACT_TYPES)}

NO_DOMAIN = "none"
NO_SLOT = "none"


def act_token(act_type: str, domain: str = NO_DOMAIN, slot: str = NO_SLOT) -> str:
    if act_type not in _TYPE_ORDER:
        raise ValueError(f"unknown act type {act_type!r}")
    return f"{act_type}-{domain}-{slot}"


def parse_act_token(token: str) -> tuple[str, str, str]:
    act_type, domain, slot = token.split("-", 2)
    return act_type, domain, slot


def canonical_act(tokens) -> tuple[str, ...]:
    """Deduplicate and sort act tokens into the canonical composite act."""
    uniq = set(tokens)
    if not uniq:
        raise ValueError("dialogue act must be non-empty")

    def key(tok):
        act_type, domain, slot = parse_act_token(tok)
        return (_TYPE_ORDER[act_type], domain, slot)

    return tuple(sorted(uniq, key=key))


def act_vocabulary(schemas: dict[str, DomainSchema]) -> list[str]:
    """Closed inventory of act tokens the head predicts over."""
    tokens = [act_token("nicety"), act_token("goodbye")]
    for name, schema in sorted(schemas.items()):
        tokens.append(act_token("inform", name, "name"))
        for slot in sorted(schema.informable):
            tokens.append(act_token("inform", name, slot))
            tokens.append(act_token("request", name, slot))
        for slot in sorted(schema.requestable):
            tokens.append(act_token("inform", name, slot))
        if schema.bookable:
            tokens.append(act_token("offer_book", name))
            tokens.append(act_token("book_confirm", name))
    seen = []
    for tok in tokens:
        if tok not in seen:
            seen.append(tok)
    return seen


def answered_pairs(act_token_seq) -> set[tuple[str, str]]:
    """(domain, slot) pairs informed anywhere in a sequence of act tokens."""
    out = set()
    for tok in act_token_seq:
        act_type, domain, slot = parse_act_token(tok)
        if act_type == "inform" and slot not in (NO_SLOT, "name"):
            out.add((domain, slot))
    return out


__all__ = [
    "ACT_TYPES",
    "BOOKING_SLOT",
    "NO_DOMAIN",
    "NO_SLOT",
    "act_token",
    "act_vocabulary",
    "answered_pairs",
    "canonical_act",
    "parse_act_token",
]
