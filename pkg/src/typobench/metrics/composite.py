"""Reference-free robustness metrics built on top of base metrics."""

from __future__ import annotations

import math
from typing import Sequence

from ..types import ScoreFile
from .bleu import BleuParams, bleu
from .chrf import ChrfParams, chrf


class IndexMismatchError(ValueError):
    pass


def check_same_indices(a: ScoreFile, b: ScoreFile) -> None:
    ia, ib = sorted(a.indices), sorted(b.indices)
    if ia != ib:
        only_a = sorted(set(ia) - set(ib))[:5]
        only_b = sorted(set(ib) - set(ia))[:5]
        raise IndexMismatchError(
            f"score files cover different segments (only in first: {only_a}, only in second: {only_b})"
        )


def delta_qe(qe_clean: ScoreFile, qe_noisy: ScoreFile) -> float:
    """Mean over segments of clean-translation QE minus noisy-translation QE.

    Both files must come from a scorer that saw the clean source.
    """
    check_same_indices(qe_clean, qe_noisy)
    if not qe_clean.rows:
        raise ValueError("delta_qe of empty score files")
    clean = qe_clean.as_dict()
    noisy = qe_noisy.as_dict()
    return math.fsum(clean[i] - noisy[i] for i in sorted(clean)) / len(clean)


def faux_metric(
    hyp_noisy: "Sequence[str] | ScoreFile",
    hyp_clean: Sequence[str] | None = None,
    base: str = "bleu",
    bleu_params: BleuParams = BleuParams(),
    chrf_params: ChrfParams = ChrfParams(),
) -> float:
    """Score noisy-source translations against clean-source translations.

    For ``base="external"`` pass the ScoreFile an external scorer produced
    with the clean-source translation in its reference slot; the result is
    its mean.
    """
    if base == "external":
        if not isinstance(hyp_noisy, ScoreFile):
            raise TypeError("external base expects a ScoreFile")
        return hyp_noisy.mean()
    if hyp_clean is None or len(hyp_noisy) != len(hyp_clean):
        raise ValueError("noisy and clean translations must have equal length")
    if base == "bleu":
        return bleu(list(hyp_noisy), list(hyp_clean), bleu_params)
    if base == "chrf":
        return chrf(list(hyp_noisy), list(hyp_clean), chrf_params)
    raise ValueError(f"unknown faux-metric base {base!r}")
