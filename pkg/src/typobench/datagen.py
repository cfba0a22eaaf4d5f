"""Noisy training and validation corpora for finetuning MT and correction models."""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

from .corpus_io import atomic_write_text, noised_line, _noise_to_json
from .noise.engine import mix_segment, noise_corpus
from .noise.layouts import load_layout
from .noise.rng import derive_seed
from .types import MixSpec, NoisedCorpus, NoisedSegment, PerturbationRecord, Segment

# rates from the finetuning recipe: 15% of tokens per noise type
TRAIN_RATES = {"swap": 0.15, "dupe": 0.15, "drop": 0.15, "key": 0.15}
VALIDATION_RATES = {"swap": 0.2, "dupe": 0.2, "drop": 0.2, "key": 0.2}


@dataclass(frozen=True)
class TrainingPair:
    input: Segment
    output: Segment
    task: str
    base_index: int
    perturbations: tuple[PerturbationRecord, ...] = ()

    def __post_init__(self):
        if self.task not in ("translation", "correction"):
            raise ValueError(f"unknown task {self.task!r}")


def mix_noise(segments: Sequence[Segment], mix: MixSpec, base: str = "", jobs: int = 1) -> NoisedCorpus:
    return noise_corpus(segments, mix, base=base, jobs=jobs)


def sample_indices(n: int, sample_size: int, seed: int) -> list[int]:
    """Seeded uniform sample without replacement.

    Smaller samples from the same seed are prefixes of larger ones.
    """
    if not 0 <= sample_size <= n:
        raise ValueError(f"sample size {sample_size} exceeds corpus size {n}")
    order = list(range(n))
    random.Random(derive_seed(seed, "subsample")).shuffle(order)
    return order[:sample_size]


def _noised(seg: Segment, mix: MixSpec) -> tuple[str, tuple[PerturbationRecord, ...]]:
    text, records = mix_segment(seg, mix)
    return text, tuple(records)


def make_mt_training_set(
    source: Sequence[Segment],
    target: Sequence[Segment],
    mix: MixSpec,
    sample_size: int,
) -> Iterator[TrainingPair]:
    """Noisy source paired with the untouched clean target."""
    if len(source) != len(target):
        raise ValueError("source and target differ in length")
    for k, i in enumerate(sample_indices(len(source), sample_size, mix.seed)):
        text, records = _noised(source[i], mix)
        yield TrainingPair(Segment(k, text), Segment(k, target[i].text), "translation", i, records)


def make_correction_training_set(
    source: Sequence[Segment],
    mix: MixSpec,
    sample_size: int,
) -> Iterator[TrainingPair]:
    """Noisy text paired with its clean original."""
    for k, i in enumerate(sample_indices(len(source), sample_size, mix.seed)):
        text, records = _noised(source[i], mix)
        yield TrainingPair(Segment(k, text), Segment(k, source[i].text), "correction", i, records)


def make_validation_set(
    dev: Sequence[Segment],
    seed: int,
    layout: str | None,
    rate: float = 0.2,
) -> tuple[list[Segment], list[TrainingPair]]:
    """Clean dev set followed by a copy with ``rate`` of tokens per noise type.

    Returns the concatenated corpus and, for the noised half, correction
    pairs carrying provenance.
    """
    mix = MixSpec({t: rate for t in VALIDATION_RATES}, seed, layout)
    n = len(dev)
    out = [Segment(s.index, s.text) for s in dev]
    pairs = []
    for seg in dev:
        text, records = _noised(seg, mix)
        out.append(Segment(n + seg.index, text))
        pairs.append(TrainingPair(Segment(n + seg.index, text), Segment(n + seg.index, seg.text), "correction", seg.index, records))
    return out, pairs


def _sha256_lines(texts: Sequence[str]) -> str:
    h = hashlib.sha256()
    for t in texts:
        h.update(t.encode("utf-8") + b"\n")
    return h.hexdigest()


def write_training_pairs(
    pairs: Sequence[TrainingPair],
    out_prefix: "str | Path",
    mix: MixSpec,
    source_texts: Sequence[str] = (),
    extra: dict | None = None,
) -> list[Path]:
    """Emit ``<name>.input.txt``, ``<name>.output.txt``, ``<name>.provenance.jsonl`` and a manifest."""
    out_prefix = Path(out_prefix)
    stem = out_prefix.name
    paths = {k: out_prefix.with_name(f"{stem}.{k}") for k in ("input.txt", "output.txt", "provenance.jsonl", "manifest.json")}
    atomic_write_text(paths["input.txt"], "".join(p.input.text + "\n" for p in pairs))
    atomic_write_text(paths["output.txt"], "".join(p.output.text + "\n" for p in pairs))
    dummy = NoisedCorpus(base=stem, noise=mix)
    noise = _noise_to_json(dummy)
    if mix.layout is not None:
        noise["layout_sha256"] = load_layout(mix.layout).checksum
    lines = []
    for p in pairs:
        obj = json.loads(noised_line(dummy, NoisedSegment(p.input.index, p.input.text, p.perturbations), noise))
        obj["base_index"] = p.base_index
        obj["task"] = p.task
        lines.append(json.dumps(obj, ensure_ascii=False, sort_keys=True))
    atomic_write_text(paths["provenance.jsonl"], "".join(line + "\n" for line in lines))
    manifest = {
        "seed": mix.seed,
        "rates": mix.rates,
        "layout": mix.layout,
        "layout_sha256": noise["layout_sha256"],
        "pairs": len(pairs),
        "source_sha256": _sha256_lines(source_texts),
        **(extra or {}),
    }
    atomic_write_text(paths["manifest.json"], json.dumps(manifest, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
    return list(paths.values())
