"""Single-token perturbations.

Each op returns ``(new_token, char_position, detail)`` or ``None`` when the
token has no eligible position. ``position``/``neighbor`` force the
random choices (used by tests and replay).
"""

from __future__ import annotations

import random
from typing import Optional

from . import hangul
from .layouts import KeyboardLayout

Result = Optional[tuple[str, int, str]]


def perturb_swap(token: str, rng: random.Random, position: int | None = None) -> Result:
    if len(token) < 2:
        return None
    i = rng.randrange(len(token) - 1) if position is None else position
    if not 0 <= i < len(token) - 1:
        raise IndexError(f"swap position {i} out of range for {token!r}")
    return token[:i] + token[i + 1] + token[i] + token[i + 2 :], i, token[i : i + 2]


def perturb_dupe(token: str, rng: random.Random, position: int | None = None) -> Result:
    if not token:
        return None
    i = rng.randrange(len(token)) if position is None else position
    if not 0 <= i < len(token):
        raise IndexError(f"dupe position {i} out of range for {token!r}")
    return token[: i + 1] + token[i:], i, token[i]


def perturb_drop(token: str, rng: random.Random, position: int | None = None) -> Result:
    # never delete a whole token
    if len(token) < 2:
        return None
    i = rng.randrange(len(token)) if position is None else position
    if not 0 <= i < len(token):
        raise IndexError(f"drop position {i} out of range for {token!r}")
    return token[:i] + token[i + 1 :], i, token[i]


def _recase(original: str, replacement: str) -> str:
    if original.isupper():
        up = replacement.upper()
        if len(up) == 1:
            return up
    return replacement


def perturb_key(
    token: str,
    rng: random.Random,
    layout: KeyboardLayout,
    position: int | None = None,
    neighbor: str | None = None,
) -> Result:
    """Replace one mapped character with an adjacent key.

    For jamo layouts the token is decomposed first and ``char_position``
    is a jamo offset; the result is recomposed.
    """
    units = hangul.decompose(token) if layout.jamo else list(token)
    eligible = [i for i, ch in enumerate(units) if layout.key_for(ch) is not None]
    if not eligible:
        return None
    if position is None:
        i = eligible[rng.randrange(len(eligible))]
    elif position in eligible:
        i = position
    else:
        raise IndexError(f"position {position} of {token!r} has no key on {layout.id}")
    nbs = layout.neighbors(units[i])
    if neighbor is None:
        nb = nbs[rng.randrange(len(nbs))]
    elif neighbor.lower() in nbs or neighbor in nbs:
        nb = neighbor.lower() if neighbor.lower() in nbs else neighbor
    else:
        raise ValueError(f"{neighbor!r} is not adjacent to {units[i]!r} on {layout.id}")
    replacement = _recase(units[i], nb)
    units[i] = replacement
    new = hangul.compose(units) if layout.jamo else "".join(units)
    return new, i, replacement


def apply_recorded(token: str, noise_type: str, position: int, detail: str, jamo: bool = False) -> str:
    """Re-apply a recorded perturbation, checking it against the token."""
    if noise_type == "key":
        units = hangul.decompose(token) if jamo else list(token)
        if not 0 <= position < len(units):
            raise ValueError(f"key position {position} out of range for {token!r}")
        units[position] = detail
        return hangul.compose(units) if jamo else "".join(units)
    if noise_type == "swap":
        if token[position : position + 2] != detail or len(detail) != 2:
            raise ValueError(f"swap record {detail!r}@{position} does not match {token!r}")
        return token[:position] + detail[::-1] + token[position + 2 :]
    if noise_type in ("dupe", "drop"):
        if position >= len(token) or token[position] != detail:
            raise ValueError(f"{noise_type} record {detail!r}@{position} does not match {token!r}")
        if noise_type == "dupe":
            return token[: position + 1] + token[position:]
        return token[:position] + token[position + 1 :]
    raise ValueError(f"unknown noise type {noise_type!r}")
