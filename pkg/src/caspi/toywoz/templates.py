"""Delexicalized surface templates for agent responses and user utterances.

Every act token realizes to one of N_VARIANTS synonym fragments; slot values
in agent responses are replaced by typed placeholders like [restaurant_name].
Template text is the single source of the surface vocabulary, so the corpus
vocabulary closes at build time.
"""

import numpy as np

from .acts import parse_act_token
from .schema import DomainSchema

N_VARIANTS = 3


class TemplateError(Exception):
    pass


def placeholder(domain: str, slot: str) -> str:
    return f"[{domain}_{slot}]"


# -- agent side ------------------------------------------------------------


def _agent_fragments(act_tok: str) -> list[str]:
    act_type, domain, slot = parse_act_token(act_tok)
    if act_type == "nicety":
        return ["you are welcome !", "happy to help !", "my pleasure !"]
    if act_type == "goodbye":
        return ["goodbye !", "have a great day !", "thanks for using our service , bye !"]
    if act_type == "request":
        return [
            f"which {slot} would you prefer ?",
            f"do you have a {slot} in mind ?",
            f"any preference on {slot} ?",
        ]
    if act_type == "offer_book":
        return [
            f"shall i book the {domain} for you ?",
            f"would you like me to reserve the {domain} ?",
            f"i can book that {domain} , should i ?",
        ]
    if act_type == "book_confirm":
        return [
            "your booking is confirmed .",
            "all booked for you .",
            "the reservation is done .",
        ]
    if act_type == "inform":
        ph = placeholder(domain, slot)
        if slot == "name":
            return [
                f"i recommend {ph} .",
                f"how about {ph} ?",
                f"{ph} is a great choice .",
            ]
        return [
            f"the {slot} is {ph} .",
            f"its {slot} is {ph} .",
            f"sure , {slot} : {ph} .",
        ]
    raise TemplateError(f"no template for act token {act_tok!r}")


def realize_response(act, rng) -> list[str]:
    """Realize a composite act to delexicalized tokens, one rng-chosen
    variant per act token; deterministic given the act and rng state."""
    tokens: list[str] = []
    for act_tok in act:
        variants = _agent_fragments(act_tok)
        choice = int(rng.integers(len(variants)))
        tokens.extend(variants[choice].split())
    return tokens


# -- user side ---------------------------------------------------------------


def _user_fragments(kind: str, domain: str = "", slot: str = "", value: str = "") -> list[str]:
    if kind == "greet":
        return ["hello ,", "hi there ,", "good day ,"]
    if kind == "find":
        return [
            f"i am looking for a {domain}",
            f"i need a {domain}",
            f"can you find me a {domain}",
        ]
    if kind == "constraint":
        return [
            f"with {slot} {value}",
            f"the {slot} should be {value}",
            f"preferably {value} for {slot}",
        ]
    if kind == "request":
        return [
            f"what is the {slot} ?",
            f"can i get the {slot} ?",
            f"please tell me the {slot} .",
        ]
    if kind == "request_book":
        return ["please book it for me .", "i would like to book it .", "can you make a booking ?"]
    if kind == "affirm":
        return ["yes please .", "yes , go ahead .", "that works for me ."]
    if kind == "thank":
        return ["thank you !", "thanks a lot !", "much appreciated !"]
    if kind == "goodbye":
        return ["that is all , goodbye .", "goodbye !", "bye bye ."]
    raise TemplateError(f"no user template kind {kind!r}")


def realize_user(parts, rng) -> list[str]:
    """parts is a list of (kind, domain, slot, value) tuples."""
    tokens: list[str] = []
    for kind, domain, slot, value in parts:
        variants = _user_fragments(kind, domain, slot, value)
        choice = int(rng.integers(len(variants)))
        tokens.extend(variants[choice].split())
    return tokens


# -- vocabulary closure -------------------------------------------------------


def surface_vocabulary(schemas: dict[str, DomainSchema]) -> set[str]:
    """Every surface token any template can emit for this schema set."""
    from .acts import act_vocabulary

    words: set[str] = set()
    for act_tok in act_vocabulary(schemas):
        for variant in _agent_fragments(act_tok):
            words.update(variant.split())
        _, domain, slot = parse_act_token(act_tok)
        if slot != "none":
            words.add(placeholder(domain, slot))
    for name, schema in schemas.items():
        for kind in ("greet", "find", "request_book", "affirm", "thank", "goodbye"):
            for variant in _user_fragments(kind, domain=name):
                words.update(variant.split())
        for slot, values in schema.informable.items():
            for value in values:
                for variant in _user_fragments("constraint", name, slot, value):
                    words.update(variant.split())
        for slot in schema.requestable:
            for variant in _user_fragments("request", name, slot):
                words.update(variant.split())
    return words
