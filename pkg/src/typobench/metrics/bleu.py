"""Corpus BLEU with brevity penalty and optional exponential smoothing."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

TOKENIZERS = ("whitespace", "char", "pretokenized")
SMOOTHING = ("exp", "none")


@dataclass(frozen=True)
class BleuParams:
    max_ngram_order: int = 4
    smoothing: str = "exp"
    tokenizer: str = "whitespace"

    def __post_init__(self):
        if self.max_ngram_order < 1:
            raise ValueError("max_ngram_order must be >= 1")
        if self.smoothing not in SMOOTHING:
            raise ValueError(f"smoothing must be one of {SMOOTHING}")
        if self.tokenizer not in TOKENIZERS:
            raise ValueError(f"tokenizer must be one of {TOKENIZERS}")


def tokenize(text: str, tokenizer: str) -> list[str]:
    # "pretokenized" text was segmented upstream (e.g. SentencePiece) and
    # is split on whitespace like "whitespace"
    if tokenizer == "char":
        return [c for c in text if not c.isspace()]
    return text.split()


def _ngrams(tokens: list[str], order: int) -> list[Counter]:
    return [Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)) for n in range(1, order + 1)]


def bleu_statistics(hypothesis: str, reference: str, params: BleuParams = BleuParams()) -> list[int]:
    """``[hyp_len, ref_len, correct_1..N, total_1..N]`` for one segment."""
    hyp = tokenize(hypothesis, params.tokenizer)
    ref = tokenize(reference, params.tokenizer)
    hyp_ng = _ngrams(hyp, params.max_ngram_order)
    ref_ng = _ngrams(ref, params.max_ngram_order)
    correct = [sum(min(c, r[g]) for g, c in h.items()) for h, r in zip(hyp_ng, ref_ng)]
    total = [max(0, len(hyp) - n + 1) for n in range(1, params.max_ngram_order + 1)]
    return [len(hyp), len(ref), *correct, *total]


def bleu_from_statistics(stats: Sequence[int], params: BleuParams = BleuParams()) -> float:
    order = params.max_ngram_order
    sys_len, ref_len = stats[0], stats[1]
    correct = stats[2 : 2 + order]
    total = stats[2 + order : 2 + 2 * order]
    if not any(correct):
        return 0.0
    bp = 1.0 if sys_len >= ref_len else math.exp(1 - ref_len / sys_len)
    log_sum = 0.0
    smooth = 1.0
    for n in range(order):
        if total[n] == 0:
            # no n-grams of this order anywhere in the corpus
            return 0.0
        if correct[n] == 0:
            if params.smoothing == "none":
                return 0.0
            smooth *= 2
            log_sum += math.log(1.0 / (smooth * total[n]))
        else:
            log_sum += math.log(correct[n] / total[n])
    return 100.0 * bp * math.exp(log_sum / order)


def bleu(
    hypotheses: Sequence[str],
    references: Sequence[str],
    params: BleuParams = BleuParams(),
) -> float:
    """Corpus BLEU in [0, 100]; statistics are summed before scoring."""
    if len(hypotheses) != len(references):
        raise ValueError(f"{len(hypotheses)} hypotheses vs {len(references)} references")
    if not hypotheses:
        raise ValueError("BLEU of an empty corpus is undefined")
    total = [0] * (2 + 2 * params.max_ngram_order)
    for h, r in zip(hypotheses, references):
        for k, v in enumerate(bleu_statistics(h, r, params)):
            total[k] += v
    return bleu_from_statistics(total, params)


def sentence_bleu(hypothesis: str, reference: str, params: BleuParams = BleuParams()) -> float:
    return bleu([hypothesis], [reference], params)
