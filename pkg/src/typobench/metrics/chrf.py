"""Character n-gram F-score (chrF / chrF++)."""

from __future__ import annotations

import string
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

_PUNCT = set(string.punctuation)


@dataclass(frozen=True)
class ChrfParams:
    char_ngram_order: int = 6
    word_ngram_order: int = 0
    beta: float = 2.0
    whitespace_included: bool = False
    effective_order: bool = True

    def __post_init__(self):
        if self.char_ngram_order < 0 or self.word_ngram_order < 0:
            raise ValueError("n-gram orders must be >= 0")
        if self.char_ngram_order + self.word_ngram_order == 0:
            raise ValueError("at least one n-gram order must be positive")
        if not self.beta > 0:
            raise ValueError("beta must be positive")

    @property
    def signature(self) -> str:
        return (
            f"nrefs:1|case:mixed|eff:{'yes' if self.effective_order else 'no'}"
            f"|nc:{self.char_ngram_order}|nw:{self.word_ngram_order}"
            f"|space:{'yes' if self.whitespace_included else 'no'}"
        )


def _char_ngrams(text: str, order: int, whitespace: bool) -> list[Counter]:
    if not whitespace:
        text = "".join(text.split())
    return [Counter(text[i : i + n] for i in range(len(text) - n + 1)) for n in range(1, order + 1)]


def _words(text: str) -> list[str]:
    # split one leading or trailing punctuation mark off each word
    words = []
    for w in text.split():
        if len(w) > 1 and w[-1] in _PUNCT:
            words += [w[:-1], w[-1]]
        elif len(w) > 1 and w[0] in _PUNCT:
            words += [w[0], w[1:]]
        else:
            words.append(w)
    return words


def _word_ngrams(text: str, order: int) -> list[Counter]:
    words = _words(text)
    return [
        Counter(tuple(words[i : i + n]) for i in range(len(words) - n + 1)) for n in range(1, order + 1)
    ]


def chrf_statistics(hypothesis: str, reference: str, params: ChrfParams = ChrfParams()) -> list[int]:
    """Flat ``[hyp, ref, match] * order`` counts for one segment.

    Hypothesis n-grams of an order for which the reference has none are
    not counted, so empty references do not penalise precision.
    """
    hyp = _char_ngrams(hypothesis, params.char_ngram_order, params.whitespace_included)
    ref = _char_ngrams(reference, params.char_ngram_order, params.whitespace_included)
    if params.word_ngram_order:
        hyp += _word_ngrams(hypothesis, params.word_ngram_order)
        ref += _word_ngrams(reference, params.word_ngram_order)
    stats = []
    for h, r in zip(hyp, ref):
        match = sum(min(c, r[g]) for g, c in h.items() if g in r)
        stats += [sum(h.values()) if r else 0, sum(r.values()), match]
    return stats


def chrf_from_statistics(stats: Sequence[int], params: ChrfParams = ChrfParams()) -> float:
    eps = 1e-16
    factor = params.beta**2
    order = params.char_ngram_order + params.word_ngram_order
    f_sum = 0.0
    prec_sum = rec_sum = 0.0
    effective = 0
    for k in range(order):
        n_hyp, n_ref, n_match = stats[3 * k : 3 * k + 3]
        prec = n_match / n_hyp if n_hyp > 0 else eps
        rec = n_match / n_ref if n_ref > 0 else eps
        denom = factor * prec + rec
        f_sum += (1 + factor) * prec * rec / denom if denom > 0 else eps
        if n_hyp > 0 and n_ref > 0:
            prec_sum += prec
            rec_sum += rec
            effective += 1
    if not params.effective_order:
        return 100 * f_sum / order
    if effective == 0:
        return 0.0
    prec, rec = prec_sum / effective, rec_sum / effective
    if prec + rec == 0:
        return 0.0
    return 100 * (1 + factor) * prec * rec / (factor * prec + rec)


def _both_empty(hyp: str, ref: str, params: ChrfParams) -> bool:
    if params.whitespace_included:
        return hyp == "" and ref == ""
    return not hyp.split() and not ref.split()


def sentence_chrf(hypothesis: str, reference: str, params: ChrfParams = ChrfParams()) -> float:
    """Segment-level chrF in [0, 100]. Two empty strings score 100."""
    if _both_empty(hypothesis, reference, params):
        return 100.0
    return chrf_from_statistics(chrf_statistics(hypothesis, reference, params), params)


def chrf(
    hypotheses: "str | Sequence[str]",
    references: "str | Sequence[str]",
    params: ChrfParams = ChrfParams(),
) -> float:
    """Corpus chrF: n-gram counts are summed over segments before scoring.

    Passing two plain strings scores them as a one-segment corpus.
    """
    if isinstance(hypotheses, str):
        hypotheses = [hypotheses]
    if isinstance(references, str):
        references = [references]
    if len(hypotheses) != len(references):
        raise ValueError(f"{len(hypotheses)} hypotheses vs {len(references)} references")
    if all(_both_empty(h, r, params) for h, r in zip(hypotheses, references)):
        return 100.0
    order = params.char_ngram_order + params.word_ngram_order
    total = [0] * (3 * order)
    for h, r in zip(hypotheses, references):
        for k, v in enumerate(chrf_statistics(h, r, params)):
            total[k] += v
    return chrf_from_statistics(total, params)
