"""Persisted runs of external systems, scoring, correction pipelines and oracle selection.

Run directory layout::

    <root>/<system>/<corpus-id>/input.txt
                               /output.txt
                               /run.json
                               /scores/<metric>.tsv
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from ..corpus_io import (
    atomic_write_text,
    comment_value,
    format_score,
    load_plain_corpus,
    read_score_file,
    write_score_file,
)
from ..metrics.bleu import BleuParams, bleu, sentence_bleu
from ..metrics.chrf import ChrfParams, chrf, sentence_chrf
from ..types import ScoreFile
from .external import (
    ExternalSystemError,
    ExternalSystemSpec,
    corrector_request,
    run_external,
    scorer_request,
    translator_request,
)

log = logging.getLogger(__name__)

SOURCE_POLICIES = ("clean_source", "actual_source")


class MissingBaseCorpusError(LookupError):
    pass


def _sha256_texts(texts: Sequence[str]) -> str:
    h = hashlib.sha256()
    for t in texts:
        h.update(t.encode("utf-8") + b"\n")
    return h.hexdigest()


def _sha256_json(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True, ensure_ascii=False).encode("utf-8")).hexdigest()


def _lines(texts: Sequence[str]) -> str:
    return "".join(t + "\n" for t in texts)


@dataclass(frozen=True)
class CorpusInput:
    """Input side of a run: texts plus where they came from.

    ``provenance`` holds at least ``base`` (the clean corpus id) and
    ``noise`` (the noise header, or None for the clean corpus).
    """

    id: str
    texts: tuple[str, ...]
    provenance: Mapping
    src_lang: str = "und"
    tgt_lang: str = "und"

    def __post_init__(self):
        object.__setattr__(self, "texts", tuple(self.texts))
        if "base" not in self.provenance:
            raise ValueError("corpus provenance needs a 'base' entry")

    @property
    def base(self) -> str:
        return self.provenance["base"]

    @property
    def is_clean(self) -> bool:
        return self.provenance.get("noise") is None


@dataclass
class RunRecord:
    system: str
    corpus_id: str
    provenance: dict
    inputs: list[str]
    outputs: list[str]
    exit_status: int = 0
    wall_time: float = 0.0
    reused: bool = False
    directory: Path | None = None
    extra: dict = field(default_factory=dict)


def run_dir(root: "str | Path", system: str, corpus_id: str) -> Path:
    return Path(root) / system / corpus_id


def _run_key(system: ExternalSystemSpec | dict, corpus: CorpusInput, requests: Sequence[dict]) -> dict:
    sys_json = system.to_json() if isinstance(system, ExternalSystemSpec) else system
    return {"system_sha256": _sha256_json(sys_json), "requests_sha256": _sha256_json(list(requests))}


def _load_completed(directory: Path, key: dict) -> dict | None:
    meta_path = directory / "run.json"
    out_path = directory / "output.txt"
    if not (meta_path.exists() and out_path.exists()):
        return None
    try:
        meta = json.loads(meta_path.read_text("utf-8"))
    except (OSError, json.JSONDecodeError):
        return None
    if meta.get("exit_status") != 0:
        return None
    if any(meta.get(k) != v for k, v in key.items()):
        return None
    outputs = [s.text for s in load_plain_corpus(out_path)]
    if _sha256_texts(outputs) != meta.get("output_sha256"):
        return None
    return {"meta": meta, "outputs": outputs}


def _meta(spec, label, corpus, requests, provenance, key) -> dict:
    return {
        "system": label,
        "system_spec": spec.to_json(),
        "corpus_id": corpus.id,
        "provenance": provenance,
        "n_segments": len(requests),
        "input_sha256": _sha256_texts(corpus.texts),
        **key,
    }


def _write_meta(directory: Path, meta: dict) -> None:
    atomic_write_text(directory / "run.json", json.dumps(meta, indent=2, sort_keys=True, ensure_ascii=False) + "\n")


def _execute_batch(
    spec: ExternalSystemSpec,
    label: str,
    jobs: Sequence[tuple[CorpusInput, list[dict], dict]],
    root: Path,
) -> list[RunRecord]:
    """Run several corpora through one system.

    Runs already completed with identical system and requests are reused;
    the rest are streamed through a single invocation of the system and
    split back into per-corpus run directories.
    """
    records: list[RunRecord | None] = [None] * len(jobs)
    pending = []
    for k, (corpus, requests, provenance) in enumerate(jobs):
        directory = run_dir(root, label, corpus.id)
        key = _run_key(spec, corpus, requests)
        done = _load_completed(directory, key)
        if done is not None:
            log.info("reusing %s/%s", label, corpus.id)
            records[k] = RunRecord(
                label, corpus.id, provenance, list(corpus.texts), done["outputs"], 0, 0.0, True, directory
            )
        else:
            meta = _meta(spec, label, corpus, requests, provenance, key)
            atomic_write_text(directory / "input.txt", _lines(corpus.texts))
            pending.append((k, directory, meta))
    if not pending:
        return records

    all_requests = [req for k, _, _ in pending for req in jobs[k][1]]
    start = time.monotonic()
    try:
        outputs = run_external(spec, all_requests)
        error = None
    except ExternalSystemError as e:
        outputs, error = e.partial, e
    elapsed = time.monotonic() - start
    log.info("%s: %d requests over %d runs in %.2fs", label, len(all_requests), len(pending), elapsed)

    offset = 0
    for k, directory, meta in pending:
        corpus, requests, provenance = jobs[k]
        part = outputs[offset : offset + len(requests)]
        offset += len(requests)
        if error is not None:
            atomic_write_text(directory / "output.partial.txt", _lines(str(x) for x in part))
            (directory / "output.txt").unlink(missing_ok=True)
            _write_meta(
                directory,
                {**meta, "exit_status": 1, "error": {"kind": error.kind, "message": str(error)}, "n_received": len(part)},
            )
            continue
        (directory / "output.partial.txt").unlink(missing_ok=True)
        atomic_write_text(directory / "output.txt", _lines(part))
        _write_meta(directory, {**meta, "exit_status": 0, "output_sha256": _sha256_texts(part)})
        share = elapsed * len(requests) / max(1, len(all_requests))
        records[k] = RunRecord(label, corpus.id, provenance, list(corpus.texts), part, 0, share, False, directory)
    if error is not None:
        raise error
    return records


def _translation_jobs(corpora: Sequence[CorpusInput], provenance_extra: dict | None = None):
    return [
        (
            c,
            [translator_request(t, c.src_lang, c.tgt_lang) for t in c.texts],
            {**c.provenance, **(provenance_extra or {})},
        )
        for c in corpora
    ]


def _check_kind(spec: ExternalSystemSpec, kind: str) -> None:
    if spec.kind != kind:
        raise ValueError(f"{spec.id} is a {spec.kind}, not a {kind}")


def translate(spec: ExternalSystemSpec, corpus: CorpusInput, root: "str | Path") -> RunRecord:
    return translate_ladder(spec, [corpus], root)[0]


def translate_ladder(
    translator: ExternalSystemSpec,
    corpora: Sequence[CorpusInput],
    root: "str | Path",
) -> list[RunRecord]:
    """One run per corpus (clean plus each noise level); finished runs are reused."""
    _check_kind(translator, "translator")
    return _execute_batch(translator, translator.id, _translation_jobs(corpora), Path(root))


def correct_ladder(corrector: ExternalSystemSpec, corpora: Sequence[CorpusInput], root: "str | Path") -> list[RunRecord]:
    _check_kind(corrector, "corrector")
    jobs = [(c, [corrector_request(t, c.src_lang) for t in c.texts], dict(c.provenance)) for c in corpora]
    return _execute_batch(corrector, corrector.id, jobs, Path(root))


def correction_ladder(
    corrector: ExternalSystemSpec,
    translator: ExternalSystemSpec,
    corpora: Sequence[CorpusInput],
    root: "str | Path",
) -> list[RunRecord]:
    """Correct each source, then translate the corrected text.

    The corrector's output is persisted under ``<corrector>/<corpus-id>``;
    the final run under ``<corrector>+<translator>/<corpus-id>`` keeps the
    original input's provenance so scoring still finds the clean base
    corpus.
    """
    _check_kind(translator, "translator")
    corrected = correct_ladder(corrector, corpora, root)
    staged = [
        CorpusInput(c.id, r.outputs, c.provenance, c.src_lang, c.tgt_lang) for c, r in zip(corpora, corrected)
    ]
    label = f"{corrector.id}+{translator.id}"
    records = _execute_batch(translator, label, _translation_jobs(staged, {"corrector": corrector.id}), Path(root))
    for rec, corr, c in zip(records, corrected, corpora):
        rec.extra["corrected"] = corr.outputs
        rec.extra["original_inputs"] = list(c.texts)
    return records


def correction_pipeline(
    corrector: ExternalSystemSpec,
    translator: ExternalSystemSpec,
    corpus: CorpusInput,
    root: "str | Path",
) -> RunRecord:
    """Corrector output feeds the translator; both stages are persisted."""
    return correction_ladder(corrector, translator, [corpus], root)[0]


def _scoring_sources(run: RunRecord, policy: str, bases: Mapping[str, Sequence[str]]) -> list[str]:
    if policy not in SOURCE_POLICIES:
        raise ValueError(f"source policy must be one of {SOURCE_POLICIES}")
    if policy == "actual_source":
        return list(run.extra.get("original_inputs", run.inputs))
    base = run.provenance.get("base")
    if base not in bases:
        raise MissingBaseCorpusError(f"run {run.system}/{run.corpus_id}: clean base corpus {base!r} is not available")
    clean = list(bases[base])
    if len(clean) != len(run.outputs):
        raise MissingBaseCorpusError(f"base corpus {base!r} has {len(clean)} segments, run has {len(run.outputs)}")
    return clean


def scorer_requests(
    run: RunRecord,
    policy: str,
    bases: Mapping[str, Sequence[str]],
    references: Mapping[str, Sequence[str]] | None = None,
) -> list[dict]:
    sources = _scoring_sources(run, policy, bases)
    refs = None
    if references is not None:
        refs = references.get(run.provenance.get("base"))
        if refs is None:
            raise MissingBaseCorpusError(f"no references for base corpus {run.provenance.get('base')!r}")
    return [
        scorer_request(src, mt, refs[k] if refs is not None else None)
        for k, (src, mt) in enumerate(zip(sources, run.outputs))
    ]


def score_runs(
    scorer: ExternalSystemSpec,
    runs: Sequence[RunRecord],
    source_policy: str = "clean_source",
    bases: Mapping[str, Sequence[str]] | None = None,
    references: Mapping[str, Sequence[str]] | None = None,
    metric: str | None = None,
) -> list[ScoreFile]:
    """Score every run with an external scorer.

    Under ``clean_source`` the scorer always sees the clean base text as
    its source, even for runs on noised input. Without ``references`` the
    scorer runs in reference-free (QE) mode.
    """
    if scorer.kind != "scorer":
        raise ValueError(f"{scorer.id} is a {scorer.kind}, not a scorer")
    metric = metric or scorer.id
    out: list[ScoreFile | None] = [None] * len(runs)
    pending = []
    for k, run in enumerate(runs):
        requests = scorer_requests(run, source_policy, bases or {}, references)
        key = _sha256_json({"scorer": scorer.to_json(), "requests": requests})
        path = run.directory / "scores" / f"{metric}.tsv" if run.directory is not None else None
        if path is not None and path.exists():
            existing = read_score_file(path)
            if comment_value(existing, "key") == key:
                out[k] = existing
                continue
        pending.append((k, requests, key, path))
    if pending:
        scores = run_external(scorer, [req for _, reqs, _, _ in pending for req in reqs])
        offset = 0
        for k, requests, key, path in pending:
            part = scores[offset : offset + len(requests)]
            offset += len(requests)
            sf = ScoreFile(runs[k].system, metric, tuple(enumerate(part)))
            if path is not None:
                write_score_file(sf, path, [f"policy={source_policy}", f"scorer={scorer.id}", f"key={key}"])
                sf = read_score_file(path)
            out[k] = sf
    return out


def score_native(
    metric: str,
    run: RunRecord,
    references: Sequence[str],
    chrf_params: ChrfParams = ChrfParams(),
    bleu_params: BleuParams = BleuParams(),
) -> ScoreFile:
    """Segment-level native scores plus the corpus-level value as a ``corpus=`` comment."""
    if len(references) != len(run.outputs):
        raise ValueError(f"{len(references)} references for {len(run.outputs)} outputs")
    if metric == "chrf":
        rows = [(k, sentence_chrf(h, r, chrf_params)) for k, (h, r) in enumerate(zip(run.outputs, references))]
        corpus = chrf(run.outputs, list(references), chrf_params)
    elif metric == "bleu":
        rows = [(k, sentence_bleu(h, r, bleu_params)) for k, (h, r) in enumerate(zip(run.outputs, references))]
        corpus = bleu(run.outputs, list(references), bleu_params)
    else:
        raise ValueError(f"unknown native metric {metric!r}")
    sf = ScoreFile(run.system, metric, tuple(rows))
    if run.directory is not None:
        write_score_file(sf, run.directory / "scores" / f"{metric}.tsv", [f"corpus={format_score(corpus)}"])
        return read_score_file(run.directory / "scores" / f"{metric}.tsv")
    return ScoreFile(run.system, metric, tuple(rows), (f"corpus={format_score(corpus)}",))


def corpus_value(sf: ScoreFile) -> float:
    """Corpus-level score: the recorded ``corpus=`` value if any, else the mean."""
    recorded = comment_value(sf, "corpus")
    return float(recorded) if recorded is not None else sf.mean()


@dataclass(frozen=True)
class OracleSelection:
    outputs: tuple[str, ...]
    scores: tuple[float, ...]
    # True where the second (pipeline) side was chosen
    mask: tuple[bool, ...]

    @property
    def mean(self) -> float:
        return math.fsum(self.scores) / len(self.scores) if self.scores else float("nan")


def oracle_select(
    scores_a: "ScoreFile | Sequence[float]",
    scores_b: "ScoreFile | Sequence[float]",
    outputs_a: Sequence[str],
    outputs_b: Sequence[str],
) -> OracleSelection:
    """Per segment, keep the output with the strictly higher score; ties keep ``a``."""
    if isinstance(scores_a, ScoreFile) or isinstance(scores_b, ScoreFile):
        if not (isinstance(scores_a, ScoreFile) and isinstance(scores_b, ScoreFile)):
            raise TypeError("pass two ScoreFiles or two sequences")
        if sorted(scores_a.indices) != sorted(scores_b.indices):
            raise ValueError("score files cover different segment indices")
        da, db = scores_a.as_dict(), scores_b.as_dict()
        order = sorted(da)
        va, vb = [da[i] for i in order], [db[i] for i in order]
    else:
        va, vb = list(scores_a), list(scores_b)
    if not (len(va) == len(vb) == len(outputs_a) == len(outputs_b)):
        raise ValueError("scores and outputs must be aligned")
    mask = tuple(b > a for a, b in zip(va, vb))
    return OracleSelection(
        tuple(ob if m else oa for m, oa, ob in zip(mask, outputs_a, outputs_b)),
        tuple(b if m else a for m, a, b in zip(mask, va, vb)),
        mask,
    )
