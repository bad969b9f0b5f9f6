"""Corpus-level BLEU: modified n-gram precision (n=1..4, uniform weights),
brevity penalty, single reference, floor smoothing.

The smoothing contract is fixed so scores are bit-reproducible: a zero
match count for order n contributes precision 1 / (2 * total_n). Orders
with no hypothesis n-grams at all are excluded from the geometric mean
(effective order), which keeps BLEU(x, x) = 1 for short sequences.
"""

import math
from collections import Counter

MAX_ORDER = 4


class BleuError(Exception):
    pass


def _ngrams(tokens, n):
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def corpus_bleu(hypotheses, references) -> float:
    """BLEU in [0, 1] over aligned token sequences, one reference each."""
    if not hypotheses:
        raise BleuError("empty hypothesis list")
    if len(hypotheses) != len(references):
        raise BleuError(
            f"{len(hypotheses)} hypotheses vs {len(references)} references"
        )
    match = [0] * MAX_ORDER
    total = [0] * MAX_ORDER
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        hyp = list(hyp)
        ref = list(ref)
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, MAX_ORDER + 1):
            h = _ngrams(hyp, n)
            if not h:
                continue
            r = _ngrams(ref, n)
            total[n - 1] += sum(h.values())
            match[n - 1] += sum(min(c, r[g]) for g, c in h.items())
    if hyp_len == 0:
        return 0.0
    log_sum = 0.0
    orders = 0
    for n in range(MAX_ORDER):
        if total[n] == 0:
            continue
        orders += 1
        p = match[n] / total[n] if match[n] > 0 else 1.0 / (2.0 * total[n])
        log_sum += math.log(p)
    if orders == 0:
        return 0.0
    bp = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len)
    return bp * math.exp(log_sum / orders)
