"""Token-sequence overlap and tokenizer fertility."""

from __future__ import annotations

from collections import Counter
from pathlib import Path
from typing import Callable, Iterable, Sequence

from ..corpus_io import read_utf8
from ..types import Segment

PieceFn = Callable[[str], Sequence[str]]


def token_f1(seq_a: Sequence[str], seq_b: Sequence[str]) -> float:
    """Bag-of-tokens F1: precision over ``seq_a``, recall over ``seq_b``."""
    if not seq_a and not seq_b:
        return 1.0
    if not seq_a or not seq_b:
        return 0.0
    overlap = sum((Counter(seq_a) & Counter(seq_b)).values())
    if overlap == 0:
        return 0.0
    # 2PR/(P+R) with P = o/|a|, R = o/|b|
    return 2 * overlap / (len(seq_a) + len(seq_b))


def whitespace_pieces(word: str) -> list[str]:
    return [word]


def char_pieces(word: str) -> list[str]:
    return list(word)


class BPETokenizer:
    """Applies a ranked merge list inside each whitespace word.

    Merges file: one ``left right`` pair per line, highest priority first;
    ``#`` lines are ignored.
    """

    def __init__(self, merges: Iterable[tuple[str, str]]):
        self.ranks = {}
        for pair in merges:
            self.ranks.setdefault(tuple(pair), len(self.ranks))

    @classmethod
    def from_file(cls, path) -> "BPETokenizer":
        merges = []
        for lineno, line in enumerate(read_utf8(path).splitlines(), start=1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'left right'")
            merges.append((parts[0], parts[1]))
        return cls(merges)

    def __call__(self, word: str) -> list[str]:
        pieces = list(word)
        while len(pieces) > 1:
            best = None
            for i in range(len(pieces) - 1):
                rank = self.ranks.get((pieces[i], pieces[i + 1]))
                if rank is not None and (best is None or rank < best[0]):
                    best = (rank, i)
            if best is None:
                break
            pair = (pieces[best[1]], pieces[best[1] + 1])
            merged = []
            i = 0
            while i < len(pieces):
                if i + 1 < len(pieces) and (pieces[i], pieces[i + 1]) == pair:
                    merged.append(pieces[i] + pieces[i + 1])
                    i += 2
                else:
                    merged.append(pieces[i])
                    i += 1
            pieces = merged
        return pieces


def fertility(segments: Iterable["Segment | str"], tokenizer: PieceFn) -> float:
    """Subword pieces per whitespace word over the whole corpus."""
    words = pieces = 0
    for seg in segments:
        text = seg.text if isinstance(seg, Segment) else seg
        for word in text.split():
            words += 1
            pieces += len(tokenizer(word))
    if words == 0:
        raise ValueError("fertility needs at least one whitespace word")
    return pieces / words


def get_tokenizer(name: str, merges: "str | Path | None" = None) -> PieceFn:
    if name == "whitespace":
        return whitespace_pieces
    if name == "char":
        return char_pieces
    if name == "bpe":
        if merges is None:
            raise ValueError("the bpe tokenizer needs a merges file")
        return BPETokenizer.from_file(merges)
    raise ValueError(f"unknown tokenizer {name!r}")
