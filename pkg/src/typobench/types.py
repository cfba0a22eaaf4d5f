"""Domain records shared across the toolkit."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

NOISE_TYPES = ("swap", "dupe", "drop", "key")
LAYOUT_IDS = ("qwerty", "qwertz", "azerty", "dubeolsik")

U64_MAX = 2**64 - 1


class SchemaError(ValueError):
    """A file or record does not match its declared schema."""


@dataclass(frozen=True)
class Segment:
    index: int
    text: str

    def __post_init__(self):
        if "\n" in self.text or "\r" in self.text:
            raise ValueError(f"segment {self.index} contains a newline")


@dataclass(frozen=True)
class ParallelCorpus:
    source: tuple[Segment, ...]
    target: Optional[tuple[Segment, ...]] = None
    language_pair: tuple[str, str] = ("und", "und")

    def __post_init__(self):
        object.__setattr__(self, "source", tuple(self.source))
        if self.target is not None:
            object.__setattr__(self, "target", tuple(self.target))
            if len(self.target) != len(self.source):
                raise ValueError(
                    f"source has {len(self.source)} segments, target has {len(self.target)}"
                )
        for side in (self.source, self.target or ()):
            for i, seg in enumerate(side):
                if seg.index != i:
                    raise ValueError(f"segment indices must be contiguous from 0, got {seg.index} at {i}")

    def __len__(self):
        return len(self.source)


@dataclass(frozen=True)
class PerturbationRecord:
    """What happened to one token.

    ``detail`` holds the swapped pair (as it was before the swap), the
    duplicated code point, the dropped code point, or the replacement
    code point for key noise. ``applied`` is False for tokens that were
    sampled for noise but had no eligible position; those records carry
    ``char_position == -1`` and an empty detail.
    """

    token_index: int
    noise_type: str
    char_position: int
    detail: str
    applied: bool = True

    def __post_init__(self):
        if self.noise_type not in NOISE_TYPES:
            raise ValueError(f"unknown noise type {self.noise_type!r}")

    def to_json(self) -> dict:
        return {
            "token": self.token_index,
            "type": self.noise_type,
            "pos": self.char_position,
            "detail": self.detail,
            "applied": self.applied,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PerturbationRecord":
        _require(obj, {"token": int, "type": str, "pos": int, "detail": str, "applied": bool})
        return cls(obj["token"], obj["type"], obj["pos"], obj["detail"], obj["applied"])


@dataclass(frozen=True)
class NoiseSpec:
    noise_type: str
    p: float
    seed: int
    layout: Optional[str] = None

    def __post_init__(self):
        if self.noise_type not in NOISE_TYPES:
            raise ValueError(f"unknown noise type {self.noise_type!r}")
        if not (0.0 <= self.p <= 1.0) or math.isnan(self.p):
            raise ValueError(f"noise level must be in [0, 1], got {self.p}")
        if not (0 <= self.seed <= U64_MAX):
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.noise_type == "key" and self.layout is None:
            raise ValueError("key noise requires a keyboard layout")
        if self.layout is not None and self.layout not in LAYOUT_IDS:
            raise ValueError(f"unknown layout {self.layout!r}; expected one of {LAYOUT_IDS}")


@dataclass(frozen=True)
class MixSpec:
    """Per-token categorical mixture over the four noise types.

    Whatever probability mass the rates leave over is the "clean" outcome.
    """

    rates: dict
    seed: int
    layout: Optional[str] = None

    def __post_init__(self):
        rates = {t: float(self.rates.get(t, 0.0)) for t in NOISE_TYPES}
        unknown = set(self.rates) - set(NOISE_TYPES)
        if unknown:
            raise ValueError(f"unknown noise types in mix: {sorted(unknown)}")
        if any(r < 0 or math.isnan(r) for r in rates.values()):
            raise ValueError("mix rates must be non-negative")
        if math.fsum(rates.values()) > 1.0 + 1e-12:
            raise ValueError(f"mix rates sum to {math.fsum(rates.values())} > 1")
        if rates["key"] > 0 and self.layout is None:
            raise ValueError("key noise requires a keyboard layout")
        if self.layout is not None and self.layout not in LAYOUT_IDS:
            raise ValueError(f"unknown layout {self.layout!r}")
        if not (0 <= self.seed <= U64_MAX):
            raise ValueError("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "rates", rates)

    @property
    def total(self) -> float:
        return math.fsum(self.rates.values())


@dataclass(frozen=True)
class NoisedSegment:
    index: int
    text: str
    perturbations: tuple[PerturbationRecord, ...] = ()


@dataclass(frozen=True)
class NoisedCorpus:
    """A noised copy of a base corpus plus per-token provenance.

    ``base`` names the clean corpus (a corpus id or path) so that later
    stages can recover the clean source. ``layout_checksum`` is the
    sha256 of the layout data file used for key noise.
    """

    base: str
    noise: "NoiseSpec | MixSpec | None"
    segments: tuple[NoisedSegment, ...] = ()
    layout_checksum: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))

    def texts(self) -> list[str]:
        return [s.text for s in self.segments]


@dataclass(frozen=True)
class ScoreFile:
    system: str
    metric: str
    rows: tuple[tuple[int, float], ...] = ()
    comments: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        rows = tuple((int(i), float(s)) for i, s in self.rows)
        seen = set()
        for i, s in rows:
            if i in seen:
                raise ValueError(f"duplicate segment index {i} in score file")
            if not math.isfinite(s):
                raise ValueError(f"non-finite score at segment {i}")
            seen.add(i)
        object.__setattr__(self, "rows", rows)

    @property
    def indices(self) -> list[int]:
        return [i for i, _ in self.rows]

    def as_dict(self) -> dict[int, float]:
        return dict(self.rows)

    def mean(self) -> float:
        if not self.rows:
            raise ValueError("mean of an empty score file")
        return math.fsum(s for _, s in sorted(self.rows)) / len(self.rows)


def _require(obj: dict, fields: dict) -> None:
    if not isinstance(obj, dict):
        raise SchemaError(f"expected an object, got {type(obj).__name__}")
    for name, typ in fields.items():
        if name not in obj:
            raise SchemaError(f"missing field {name!r}")
        value = obj[name]
        # bool is an int subclass; keep them apart
        if typ is int and isinstance(value, bool):
            raise SchemaError(f"field {name!r} must be int")
        if typ is float and isinstance(value, (int, float)) and not isinstance(value, bool):
            continue
        if not isinstance(value, typ):
            raise SchemaError(f"field {name!r} must be {typ.__name__}, got {type(value).__name__}")
