"""Reading and writing corpora, noised corpora and score files.

All text is UTF-8; undecodable bytes are an error, never replaced.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence, Union

from .types import (
    MixSpec,
    NoisedCorpus,
    NoisedSegment,
    NoiseSpec,
    PerturbationRecord,
    SchemaError,
    ScoreFile,
    Segment,
    _require,
)

PathLike = Union[str, Path]


class CorpusFormatError(ValueError):
    """Raised for undecodable or malformed corpus files."""


def atomic_write_bytes(path: PathLike, data: bytes) -> None:
    """Write ``data`` to ``path`` via a temp file in the same directory and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: PathLike, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def read_utf8(path: PathLike) -> str:
    data = Path(path).read_bytes()
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise CorpusFormatError(f"{path}: invalid UTF-8 at byte offset {e.start}") from None


def _split_lines(text: str) -> list[str]:
    if not text:
        return []
    lines = text.split("\n")
    if lines[-1] == "":
        lines.pop()
    return [line[:-1] if line.endswith("\r") else line for line in lines]


def load_plain_corpus(path: PathLike, side: str = "source") -> list[Segment]:
    """One segment per line; empty lines become empty segments."""
    if side not in ("source", "target"):
        raise ValueError(f"side must be 'source' or 'target', got {side!r}")
    return [Segment(i, line) for i, line in enumerate(_split_lines(read_utf8(path)))]


def write_plain_corpus(path: PathLike, segments: Iterable[Union[Segment, str]]) -> None:
    lines = [s.text if isinstance(s, Segment) else s for s in segments]
    for i, line in enumerate(lines):
        if "\n" in line:
            raise ValueError(f"line {i} contains a newline")
    atomic_write_text(path, "".join(line + "\n" for line in lines))


def load_lexnorm_corpus(path: PathLike) -> list[tuple[Segment, Segment]]:
    """Parse a lexical-normalization file (``raw<TAB>normalized`` per token).

    Sentences are separated by blank lines. Empty normalizations are
    deletions and are left out of the clean side; multi-word
    normalizations keep their internal spaces.
    """
    pairs: list[tuple[Segment, Segment]] = []
    raw: list[str] = []
    norm: list[str] = []

    def flush():
        if raw:
            i = len(pairs)
            pairs.append((Segment(i, " ".join(raw)), Segment(i, " ".join(norm))))
            raw.clear()
            norm.clear()

    for lineno, line in enumerate(_split_lines(read_utf8(path)), start=1):
        if line.strip() == "":
            flush()
            continue
        if "\t" not in line:
            raise CorpusFormatError(f"{path}:{lineno}: expected 'raw<TAB>normalized'")
        raw_tok, norm_tok = line.split("\t", 1)
        if "\t" in norm_tok:
            raise CorpusFormatError(f"{path}:{lineno}: trailing garbage after normalized column")
        if raw_tok == "":
            raise CorpusFormatError(f"{path}:{lineno}: empty raw token")
        raw.append(raw_tok)
        if norm_tok.strip():
            norm.append(norm_tok.strip())
    flush()
    return pairs


# noised corpora ---------------------------------------------------------


def _noise_to_json(corpus: NoisedCorpus) -> dict:
    spec = corpus.noise
    if isinstance(spec, NoiseSpec):
        out = {"type": spec.noise_type, "p": spec.p, "seed": spec.seed, "layout": spec.layout}
    elif isinstance(spec, MixSpec):
        out = {
            "type": "mix",
            "p": spec.total,
            "seed": spec.seed,
            "layout": spec.layout,
            "rates": dict(spec.rates),
        }
    else:
        raise SchemaError("noised corpus has no noise spec")
    out["base"] = corpus.base
    out["layout_sha256"] = corpus.layout_checksum
    return out


def _noise_from_json(obj: dict):
    _require(obj, {"type": str, "p": float, "seed": int, "base": str})
    layout = obj.get("layout")
    if layout is not None and not isinstance(layout, str):
        raise SchemaError("field 'layout' must be a string or null")
    checksum = obj.get("layout_sha256")
    try:
        if obj["type"] == "mix":
            if not isinstance(obj.get("rates"), dict):
                raise SchemaError("mix noise requires a 'rates' object")
            spec = MixSpec(obj["rates"], obj["seed"], layout)
        else:
            spec = NoiseSpec(obj["type"], float(obj["p"]), obj["seed"], layout)
    except ValueError as e:
        if isinstance(e, SchemaError):
            raise
        raise SchemaError(str(e)) from None
    return spec, obj["base"], checksum


def noised_line(corpus: NoisedCorpus, seg: NoisedSegment, noise: dict | None = None) -> str:
    obj = {
        "index": seg.index,
        "text": seg.text,
        "noise": noise if noise is not None else _noise_to_json(corpus),
        "perturbations": [r.to_json() for r in seg.perturbations],
    }
    return json.dumps(obj, ensure_ascii=False, sort_keys=True)


def dumps_noised_jsonl(corpus: NoisedCorpus) -> str:
    if not corpus.segments:
        return ""
    noise = _noise_to_json(corpus)
    return "".join(noised_line(corpus, s, noise) + "\n" for s in corpus.segments)


def write_noised_jsonl(corpus: NoisedCorpus, path: PathLike) -> None:
    atomic_write_text(path, dumps_noised_jsonl(corpus))


def read_noised_jsonl(path: PathLike) -> NoisedCorpus:
    """Inverse of :func:`write_noised_jsonl`.

    A zero-line file carries no noise header and reads back as an empty
    corpus with ``noise=None``.
    """
    segments = []
    header = None
    for lineno, line in enumerate(_split_lines(read_utf8(path)), start=1):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise SchemaError(f"{path}:{lineno}: invalid JSON ({e.msg})") from None
        try:
            _require(obj, {"index": int, "text": str, "noise": dict, "perturbations": list})
            spec = _noise_from_json(obj["noise"])
            records = tuple(PerturbationRecord.from_json(r) for r in obj["perturbations"])
        except (SchemaError, ValueError) as e:
            raise SchemaError(f"{path}:{lineno}: {e}") from None
        if header is None:
            header = spec
        elif spec != header:
            raise SchemaError(f"{path}:{lineno}: noise header differs from line 1")
        segments.append(NoisedSegment(obj["index"], obj["text"], records))
    if header is None:
        return NoisedCorpus(base="", noise=None, segments=())
    spec, base, checksum = header
    return NoisedCorpus(base=base, noise=spec, segments=tuple(segments), layout_checksum=checksum)


# score files ------------------------------------------------------------


def format_score(x: float) -> str:
    return repr(float(x))


def write_score_file(score_file: ScoreFile, path: PathLike, comments: Sequence[str] = ()) -> None:
    head = [f"# system={score_file.system}", f"# metric={score_file.metric}"]
    head += [f"# {c}" for c in (*score_file.comments, *comments)]
    body = [f"{i}\t{format_score(s)}" for i, s in score_file.rows]
    atomic_write_text(path, "".join(line + "\n" for line in head + body))


def read_score_file(path: PathLike, system: str | None = None, metric: str | None = None) -> ScoreFile:
    """Read ``index<TAB>score`` rows; ``#`` lines are comments.

    ``system=`` and ``metric=`` comment lines written by
    :func:`write_score_file` fill in ids not given explicitly.
    """
    rows = []
    comments = []
    meta = {}
    for lineno, line in enumerate(_split_lines(read_utf8(path)), start=1):
        if line.startswith("#"):
            body = line[1:].strip()
            key, eq, value = body.partition("=")
            if eq and key in ("system", "metric") and key not in meta:
                meta[key] = value
            else:
                comments.append(body)
            continue
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise SchemaError(f"{path}:{lineno}: expected 'index<TAB>score'")
        try:
            idx, score = int(parts[0]), float(parts[1])
        except ValueError:
            raise SchemaError(f"{path}:{lineno}: unparseable row {line!r}") from None
        if not math.isfinite(score):
            raise SchemaError(f"{path}:{lineno}: non-finite score")
        rows.append((idx, score))
    try:
        return ScoreFile(
            system if system is not None else meta.get("system", ""),
            metric if metric is not None else meta.get("metric", ""),
            tuple(rows),
            tuple(comments),
        )
    except ValueError as e:
        raise SchemaError(f"{path}: {e}") from None


def comment_value(score_file: ScoreFile, key: str) -> str | None:
    """Look up a ``key=value`` comment line."""
    for c in score_file.comments:
        k, eq, v = c.partition("=")
        if eq and k.strip() == key:
            return v.strip()
    return None
