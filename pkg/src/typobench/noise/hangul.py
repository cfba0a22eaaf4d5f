"""Hangul syllable <-> compatibility jamo conversion.

Syllables U+AC00..U+D7A3 are ``0xAC00 + (lead * 21 + vowel) * 28 + tail``.
Jamo are emitted in the Hangul Compatibility Jamo block (U+3131..U+318E),
the code points a Dubeolsik keyboard actually types.
"""

from __future__ import annotations

SBASE = 0xAC00
NSYLLABLES = 11172
VCOUNT = 21
TCOUNT = 28

LEADS = "ㄱㄲㄴㄷㄸㄹㅁㅂㅃㅅㅆㅇㅈㅉㅊㅋㅌㅍㅎ"
VOWELS = "ㅏㅐㅑㅒㅓㅔㅕㅖㅗㅘㅙㅚㅛㅜㅝㅞㅟㅠㅡㅢㅣ"
# index 0 is "no trailing consonant"
TAILS = "\0ㄱㄲㄳㄴㄵㄶㄷㄹㄺㄻㄼㄽㄾㄿㅀㅁㅂㅄㅅㅆㅇㅈㅊㅋㅌㅍㅎ"

_LEAD_IDX = {c: i for i, c in enumerate(LEADS)}
_VOWEL_IDX = {c: i for i, c in enumerate(VOWELS)}
_TAIL_IDX = {c: i for i, c in enumerate(TAILS) if i}


def is_syllable(ch: str) -> bool:
    return SBASE <= ord(ch) < SBASE + NSYLLABLES


def decompose(text: str) -> list[str]:
    """Expand precomposed syllables into jamo; other code points pass through."""
    out = []
    for ch in text:
        code = ord(ch) - SBASE
        if 0 <= code < NSYLLABLES:
            lead, rest = divmod(code, VCOUNT * TCOUNT)
            vowel, tail = divmod(rest, TCOUNT)
            out.append(LEADS[lead])
            out.append(VOWELS[vowel])
            if tail:
                out.append(TAILS[tail])
        else:
            out.append(ch)
    return out


def compose(jamo) -> str:
    """Greedy left-to-right recomposition.

    A lead consonant followed by a vowel opens a syllable; a following
    consonant becomes its tail unless it is itself followed by a vowel
    (then it opens the next syllable). Anything that cannot be placed is
    kept as a literal jamo.
    """
    seq = list(jamo)
    out = []
    i, n = 0, len(seq)
    while i < n:
        ch = seq[i]
        if ch in _LEAD_IDX and i + 1 < n and seq[i + 1] in _VOWEL_IDX:
            lead, vowel = _LEAD_IDX[ch], _VOWEL_IDX[seq[i + 1]]
            tail = 0
            j = i + 2
            if j < n and seq[j] in _TAIL_IDX and not (j + 1 < n and seq[j + 1] in _VOWEL_IDX):
                tail = _TAIL_IDX[seq[j]]
                j += 1
            out.append(chr(SBASE + (lead * VCOUNT + vowel) * TCOUNT + tail))
            i = j
        else:
            out.append(ch)
            i += 1
    return "".join(out)
