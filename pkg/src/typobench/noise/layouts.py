"""Keyboard layouts and key adjacency.

Layouts ship as small text files in ``noise/data``::

    # comment
    layout qwerty
    version 1
    stagger 1.5 1.75 2.25
    row qwertyuiop
    row asdfghjkl
    row zxcvbnm
    shift ㅃ ㅂ
    adjacency
    a: q s w x z

``stagger`` gives the horizontal offset of each row in key widths.
``shift`` lines map a shifted character onto the key that types it.
The ``adjacency`` section is authoritative; :func:`compute_adjacency`
regenerates it from the rows (see ``scripts/build_layouts.py``).

Neighbor rule: the keys directly left and right on the same row, plus
the two nearest keys (by horizontal distance) on each adjacent row;
the resulting relation is then made symmetric.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from types import MappingProxyType
from typing import Mapping, Sequence

from ..types import LAYOUT_IDS


class LayoutError(ValueError):
    pass


@dataclass(frozen=True)
class KeyboardLayout:
    id: str
    version: int
    rows: tuple[str, ...]
    stagger: tuple[float, ...]
    adjacency: Mapping[str, tuple[str, ...]]
    shift: Mapping[str, str]
    checksum: str
    jamo: bool = False

    def key_for(self, ch: str) -> str | None:
        """Base key typing ``ch`` (lowercased, shift-resolved), or None if unmapped."""
        low = ch.lower() if len(ch.lower()) == 1 else ch
        low = self.shift.get(low, low)
        return low if low in self.adjacency else None

    def neighbors(self, ch: str) -> tuple[str, ...]:
        key = self.key_for(ch)
        return self.adjacency[key] if key is not None else ()


def compute_adjacency(rows: Sequence[str], stagger: Sequence[float]) -> dict[str, tuple[str, ...]]:
    if len(rows) != len(stagger):
        raise LayoutError("need one stagger value per row")
    pos = {}
    for r, (row, off) in enumerate(zip(rows, stagger)):
        for k, ch in enumerate(row):
            if ch in pos:
                raise LayoutError(f"key {ch!r} appears twice")
            pos[ch] = (r, off + k)
    edges: dict[str, set[str]] = {ch: set() for ch in pos}
    for r, row in enumerate(rows):
        for k, ch in enumerate(row):
            if k > 0:
                edges[ch].add(row[k - 1])
            if k + 1 < len(row):
                edges[ch].add(row[k + 1])
            x = pos[ch][1]
            for rr in (r - 1, r + 1):
                if 0 <= rr < len(rows):
                    ranked = sorted(rows[rr], key=lambda c: (abs(pos[c][1] - x), pos[c][1]))
                    edges[ch].update(ranked[:2])
    for ch in list(edges):
        for nb in edges[ch]:
            edges[nb].add(ch)
    return {ch: tuple(sorted(nbs)) for ch, nbs in edges.items()}


def format_layout(
    layout_id: str,
    version: int,
    rows: Sequence[str],
    stagger: Sequence[float],
    shift: Mapping[str, str] | None = None,
    comment: str = "",
) -> str:
    lines = [f"# {line}" for line in comment.splitlines()]
    lines += [f"layout {layout_id}", f"version {version}", "stagger " + " ".join(str(s) for s in stagger)]
    lines += [f"row {row}" for row in rows]
    lines += [f"shift {k} {v}" for k, v in (shift or {}).items()]
    lines.append("adjacency")
    adj = compute_adjacency(rows, stagger)
    lines += [f"{ch}: {' '.join(nbs)}" for ch, nbs in adj.items()]
    return "\n".join(lines) + "\n"


def parse_layout(text: str) -> KeyboardLayout:
    layout_id = None
    version = None
    stagger: tuple[float, ...] = ()
    rows: list[str] = []
    shift: dict[str, str] = {}
    adjacency: dict[str, tuple[str, ...]] = {}
    in_adjacency = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if in_adjacency:
            key, colon, rest = line.partition(":")
            key = key.strip()
            if not colon or len(key) != 1:
                raise LayoutError(f"line {lineno}: expected '<key>: <neighbors>'")
            nbs = tuple(rest.split())
            if not nbs or any(len(n) != 1 for n in nbs):
                raise LayoutError(f"line {lineno}: neighbor list must be nonempty single characters")
            adjacency[key] = nbs
            continue
        word, _, rest = line.partition(" ")
        if word == "layout":
            layout_id = rest.strip()
        elif word == "version":
            version = int(rest)
        elif word == "stagger":
            stagger = tuple(float(x) for x in rest.split())
        elif word == "row":
            rows.append(rest.strip())
        elif word == "shift":
            a, b = rest.split()
            shift[a] = b
        elif word == "adjacency":
            in_adjacency = True
        else:
            raise LayoutError(f"line {lineno}: unknown directive {word!r}")
    if layout_id not in LAYOUT_IDS:
        raise LayoutError(f"unknown or missing layout id {layout_id!r}")
    if version is None or not rows or not adjacency:
        raise LayoutError("layout file needs version, rows and an adjacency section")
    keys = set("".join(rows))
    for key, nbs in adjacency.items():
        if key not in keys:
            raise LayoutError(f"adjacency key {key!r} not on any row")
        for nb in nbs:
            if key not in adjacency.get(nb, ()):
                raise LayoutError(f"adjacency not symmetric: {key!r} -> {nb!r}")
    for shifted, base in shift.items():
        if base not in adjacency:
            raise LayoutError(f"shift target {base!r} is not a mapped key")
    return KeyboardLayout(
        id=layout_id,
        version=version,
        rows=tuple(rows),
        stagger=stagger,
        adjacency=MappingProxyType(adjacency),
        shift=MappingProxyType(shift),
        checksum=hashlib.sha256(text.encode("utf-8")).hexdigest(),
        jamo=layout_id == "dubeolsik",
    )


@lru_cache(maxsize=None)
def load_layout(layout_id: str) -> KeyboardLayout:
    if layout_id not in LAYOUT_IDS:
        raise LayoutError(f"unknown layout {layout_id!r}; expected one of {LAYOUT_IDS}")
    text = resources.files("typobench.noise").joinpath("data", f"{layout_id}.layout").read_text("utf-8")
    layout = parse_layout(text)
    if layout.id != layout_id:
        raise LayoutError(f"{layout_id}.layout declares id {layout.id!r}")
    return layout
