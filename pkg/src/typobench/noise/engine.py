"""Segment- and corpus-level noising."""

from __future__ import annotations

import hashlib
import json
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from ..corpus_io import atomic_write_text, dumps_noised_jsonl
from ..types import (
    NOISE_TYPES,
    MixSpec,
    NoisedCorpus,
    NoisedSegment,
    NoiseSpec,
    PerturbationRecord,
    Segment,
)
from .layouts import KeyboardLayout, load_layout
from .ops import apply_recorded, perturb_drop, perturb_dupe, perturb_key, perturb_swap
from .rng import derive_rng, derive_seed

LADDER_LEVELS = tuple(round(0.1 * k, 1) for k in range(1, 11))

_TOKEN = re.compile(r"\S+")


@dataclass(frozen=True)
class TokenView:
    token: str
    start: int
    end: int


def tokenize(text: str) -> list[TokenView]:
    """Whitespace-delimited tokens with their spans; gaps are left untouched."""
    return [TokenView(m.group(), m.start(), m.end()) for m in _TOKEN.finditer(text)]


def _apply(noise_type: str, token: str, rng, layout: KeyboardLayout | None):
    if noise_type == "swap":
        return perturb_swap(token, rng)
    if noise_type == "dupe":
        return perturb_dupe(token, rng)
    if noise_type == "drop":
        return perturb_drop(token, rng)
    return perturb_key(token, rng, layout)


def _splice(text: str, views: Sequence[TokenView], replaced: dict[int, str]) -> str:
    if not replaced:
        return text
    parts = []
    last = 0
    for k, v in enumerate(views):
        parts.append(text[last : v.start])
        parts.append(replaced.get(k, v.token))
        last = v.end
    parts.append(text[last:])
    return "".join(parts)


def _noise_tokens(segment: Segment, seed: int, choose, layout: KeyboardLayout | None):
    views = tokenize(segment.text)
    replaced = {}
    records = []
    for k, view in enumerate(views):
        rng = derive_rng(seed, segment.index, k)
        noise_type = choose(rng.random())
        if noise_type is None:
            continue
        result = _apply(noise_type, view.token, rng, layout)
        if result is None:
            records.append(PerturbationRecord(k, noise_type, -1, "", applied=False))
            continue
        new, pos, detail = result
        replaced[k] = new
        records.append(PerturbationRecord(k, noise_type, pos, detail))
    return _splice(segment.text, views, replaced), records


def noise_segment(segment: Segment, spec: NoiseSpec) -> tuple[str, list[PerturbationRecord]]:
    """Perturb each token independently with probability ``spec.p``.

    Tokens drawn for noise but without an eligible position get a no-op
    record (``applied=False``) and are left as they are.
    """
    layout = load_layout(spec.layout) if spec.noise_type == "key" else None
    p = spec.p
    return _noise_tokens(segment, spec.seed, lambda u: spec.noise_type if u < p else None, layout)


def mix_segment(segment: Segment, mix: MixSpec) -> tuple[str, list[PerturbationRecord]]:
    """One categorical draw per token over swap/dupe/drop/key/clean."""
    layout = load_layout(mix.layout) if mix.rates["key"] > 0 else None
    bounds = []
    acc = 0.0
    for t in NOISE_TYPES:
        acc += mix.rates[t]
        bounds.append((acc, t))

    def choose(u):
        for bound, t in bounds:
            if u < bound:
                return t
        return None

    return _noise_tokens(segment, mix.seed, choose, layout)


def replay_segment(text: str, records: Iterable[PerturbationRecord], jamo: bool = False) -> str:
    """Apply recorded perturbations to a clean text."""
    views = tokenize(text)
    replaced = {}
    for r in records:
        if not r.applied:
            continue
        if not 0 <= r.token_index < len(views):
            raise ValueError(f"record references token {r.token_index}, text has {len(views)}")
        if r.token_index in replaced:
            raise ValueError(f"token {r.token_index} carries more than one perturbation")
        replaced[r.token_index] = apply_recorded(
            views[r.token_index].token, r.noise_type, r.char_position, r.detail, jamo
        )
    return _splice(text, views, replaced)


def _noise_chunk(args):
    segments, spec = args
    fn = mix_segment if isinstance(spec, MixSpec) else noise_segment
    out = []
    for seg in segments:
        text, records = fn(seg, spec)
        out.append(NoisedSegment(seg.index, text, tuple(records)))
    return out


def _chunks(seq, n):
    size = max(1, -(-len(seq) // n))
    return [seq[i : i + size] for i in range(0, len(seq), size)]


def noise_corpus(
    segments: Sequence[Segment],
    spec: "NoiseSpec | MixSpec",
    base: str = "",
    jobs: int = 1,
) -> NoisedCorpus:
    """Noise a whole corpus. Output does not depend on ``jobs``."""
    segments = list(segments)
    if jobs > 1 and len(segments) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = pool.map(_noise_chunk, [(c, spec) for c in _chunks(segments, jobs * 4)])
            noised = [s for part in parts for s in part]
    else:
        noised = _noise_chunk((segments, spec))
    checksum = load_layout(spec.layout).checksum if spec.layout is not None else None
    return NoisedCorpus(base=base, noise=spec, segments=tuple(noised), layout_checksum=checksum)


def level_seed(seed: int, noise_type: str, level_index: int) -> int:
    return derive_seed(seed, "ladder", noise_type, level_index)


def make_noise_ladder(
    segments: Sequence[Segment],
    noise_type: str,
    layout: str | None,
    seed: int,
    base: str = "",
    jobs: int = 1,
) -> list[NoisedCorpus]:
    """Ten noised copies at p = 0.1 ... 1.0, each with its own derived seed."""
    ladder = []
    for k, p in enumerate(LADDER_LEVELS):
        spec = NoiseSpec(noise_type, p, level_seed(seed, noise_type, k), layout)
        ladder.append(noise_corpus(segments, spec, base=base, jobs=jobs))
    return ladder


def attempt_stats(corpus: NoisedCorpus, segments: Sequence[Segment]) -> dict:
    """Token counts: total, attempted (sampled for noise) and applied."""
    total = sum(len(tokenize(s.text)) for s in segments)
    attempted = sum(len(s.perturbations) for s in corpus.segments)
    applied = sum(1 for s in corpus.segments for r in s.perturbations if r.applied)
    by_type = {t: 0 for t in NOISE_TYPES}
    for s in corpus.segments:
        for r in s.perturbations:
            by_type[r.noise_type] += 1
    return {"tokens": total, "attempted": attempted, "applied": applied, "by_type": by_type}


def ladder_filename(p: float) -> str:
    return f"p{p:.1f}.jsonl"


def write_ladder(
    segments: Sequence[Segment],
    noise_type: str,
    layout: str | None,
    seed: int,
    out_dir,
    base: str = "",
    jobs: int = 1,
) -> tuple[list[NoisedCorpus], dict]:
    """Write the ten ladder files plus ``manifest.json`` into ``out_dir``."""
    out_dir = Path(out_dir)
    ladder = make_noise_ladder(segments, noise_type, layout, seed, base=base, jobs=jobs)
    files = []
    for corpus in ladder:
        text = dumps_noised_jsonl(corpus)
        name = ladder_filename(corpus.noise.p)
        atomic_write_text(out_dir / name, text)
        stats = attempt_stats(corpus, segments)
        files.append(
            {
                "file": name,
                "p": corpus.noise.p,
                "seed": corpus.noise.seed,
                "sha256": hashlib.sha256(text.encode("utf-8")).hexdigest(),
                "tokens": stats["tokens"],
                "attempted": stats["attempted"],
                "applied": stats["applied"],
            }
        )
    manifest = {
        "base": base,
        "noise_type": noise_type,
        "seed": seed,
        "layout": layout,
        "layout_sha256": load_layout(layout).checksum if layout is not None else None,
        "segments": len(segments),
        "levels": files,
    }
    atomic_write_text(out_dir / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
    return ladder, manifest
