import math
from itertools import permutations

import pytest

from caspi.dialmetrics import BleuError, corpus_bleu


def oracle_bleu(hyps, refs):
    """Independent reference implementation: plain dict counting, no shared
    code with the package."""
    match = {n: 0 for n in (1, 2, 3, 4)}
    total = {n: 0 for n in (1, 2, 3, 4)}
    hyp_len = sum(len(h) for h in hyps)
    ref_len = sum(len(r) for r in refs)
    for hyp, ref in zip(hyps, refs):
        for n in (1, 2, 3, 4):
            hс = {}
            for i in range(len(hyp) - n + 1):
                g = tuple(hyp[i : i + n])
                hс[g] = hс.get(g, 0) + 1
            rc = {}
            for i in range(len(ref) - n + 1):
                g = tuple(ref[i : i + n])
                rc[g] = rc.get(g, 0) + 1
            for g, c in hс.items():
                total[n] += c
                match[n] += min(c, rc.get(g, 0))
    if hyp_len == 0:
        return 0.0
    logs = []
    for n in (1, 2, 3, 4):
        if total[n] == 0:
            continue  # effective order: no hypothesis n-grams of this size
        p = match[n] / total[n] if match[n] > 0 else 1.0 / (2 * total[n])
        logs.append(math.log(p))
    if not logs:
        return 0.0
    bp = 1.0 if hyp_len >= ref_len else math.exp(1 - ref_len / hyp_len)
    return bp * math.exp(sum(logs) / len(logs))


TOY_HYPS = [
    "the cat sat on the mat".split(),
    "a quick brown fox".split(),
    "hello there general".split(),
    "the reservation is done .".split(),
    "i recommend the golden palace".split(),
]
TOY_REFS = [
    "the cat sat on a mat".split(),
    "the quick brown fox jumps".split(),
    "hello there".split(),
    "your booking is done .".split(),
    "i would recommend the palace".split(),
]


def test_identical_corpus_scores_one():
    assert corpus_bleu(TOY_REFS, TOY_REFS) == pytest.approx(1.0, abs=1e-12)


def test_disjoint_hypothesis_hits_smoothing_floor():
    hyp = ["a", "b", "c"]
    ref = ["x", "y", "z"]
    # all present orders smoothed: 1/(2*3), 1/(2*2), 1/(2*1); no 4-grams
    expect = (1 / 6 * 1 / 4 * 1 / 2) ** (1 / 3)
    assert corpus_bleu([hyp], [ref]) == pytest.approx(expect, rel=1e-12)


def test_toy_set_matches_independent_oracle():
    got = corpus_bleu(TOY_HYPS, TOY_REFS)
    expect = oracle_bleu(TOY_HYPS, TOY_REFS)
    assert got == pytest.approx(expect, rel=1e-12)
    # frozen value from the oracle above
    assert got == pytest.approx(0.34528637023264463, rel=1e-9)


def test_brevity_penalty_on_short_hypotheses():
    hyp = ["the", "cat"]
    ref = ["the", "cat", "sat", "down"]
    got = corpus_bleu([hyp], [ref])
    assert got == pytest.approx(oracle_bleu([hyp], [ref]), rel=1e-12)
    assert got < corpus_bleu([ref], [ref])


def test_permutation_invariance_over_dialogue_order():
    base = corpus_bleu(TOY_HYPS, TOY_REFS)
    for perm in list(permutations(range(5)))[:12]:
        hyps = [TOY_HYPS[i] for i in perm]
        refs = [TOY_REFS[i] for i in perm]
        assert corpus_bleu(hyps, refs) == pytest.approx(base, rel=1e-12)


def test_empty_hypothesis_list_rejected():
    with pytest.raises(BleuError, match="empty"):
        corpus_bleu([], [])


def test_length_mismatch_rejected():
    with pytest.raises(BleuError, match="vs"):
        corpus_bleu([["a"]], [["a"], ["b"]])


def test_individual_empty_hypothesis_contributes_zero_counts():
    with_empty = corpus_bleu(TOY_HYPS + [[]], TOY_REFS + [["pad", "pad"]])
    hand = oracle_bleu(TOY_HYPS + [[]], TOY_REFS + [["pad", "pad"]])
    assert with_empty == pytest.approx(hand, rel=1e-12)


def test_all_empty_hypotheses_score_zero():
    assert corpus_bleu([[], []], [["a"], ["b"]]) == 0.0
