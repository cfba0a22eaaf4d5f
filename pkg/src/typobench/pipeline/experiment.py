"""Experiment manifests and the end-to-end robustness experiment.

A manifest (YAML or JSON) declares corpora, external systems, noise
types, metrics and correction pipelines. Relative paths resolve against
the manifest's directory. Unknown keys are rejected.
"""

from __future__ import annotations

import dataclasses
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import yaml

from ..analysis import Trajectory, build_trajectory, emit_report, win_loss
from ..corpus_io import atomic_write_text, format_score, load_plain_corpus, read_score_file
from ..noise.engine import write_ladder
from ..types import LAYOUT_IDS, NOISE_TYPES, U64_MAX
from .external import ExternalSystemSpec
from .runs import (
    SOURCE_POLICIES,
    CorpusInput,
    RunRecord,
    correction_ladder,
    corpus_value,
    oracle_select,
    score_native,
    score_runs,
    translate_ladder,
)

log = logging.getLogger(__name__)

# default keyboard layout per source language
DEFAULT_LAYOUTS = {"en": "qwerty", "pt": "qwerty", "de": "qwertz", "fr": "azerty", "ko": "dubeolsik"}

RESERVED_DIRS = ("corpora", "report")


class ConfigError(ValueError):
    pass


def _check_keys(obj: Any, cls, where: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected a mapping")
    allowed = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")
    required = {
        f.name
        for f in dataclasses.fields(cls)
        if f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING
    }
    missing = sorted(required - set(obj))
    if missing:
        raise ConfigError(f"{where}: missing keys {missing}")
    return obj


@dataclass(frozen=True)
class CorpusConfig:
    id: str
    source: str
    target: str | None = None
    src_lang: str = "en"
    tgt_lang: str = "und"
    layout: str | None = None

    @property
    def key_layout(self) -> str | None:
        return self.layout or DEFAULT_LAYOUTS.get(self.src_lang)


@dataclass(frozen=True)
class MetricConfig:
    id: str
    kind: str = "native"
    scorer: str | None = None
    reference: str = "target"
    policy: str = "clean_source"


@dataclass(frozen=True)
class PipelineConfig:
    corrector: str
    translator: str


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int
    corpora: tuple[CorpusConfig, ...]
    systems: tuple[ExternalSystemSpec, ...]
    metrics: tuple[MetricConfig, ...]
    noise_types: tuple[str, ...] = NOISE_TYPES
    pipelines: tuple[PipelineConfig, ...] = ()
    output: str = "runs"
    tie_epsilon: float = 0.0
    jobs: int = 1

    def system(self, system_id: str) -> ExternalSystemSpec:
        for s in self.systems:
            if s.id == system_id:
                return s
        raise ConfigError(f"no system with id {system_id!r}")


def parse_config(raw: dict, base_dir: "str | Path" = ".") -> ExperimentConfig:
    base_dir = Path(base_dir)
    _check_keys(raw, ExperimentConfig, "manifest")

    def resolve(p):
        return None if p is None else str((base_dir / p) if not Path(p).is_absolute() else Path(p))

    corpora = []
    for k, c in enumerate(raw["corpora"] or []):
        _check_keys(c, CorpusConfig, f"corpora[{k}]")
        c = CorpusConfig(**{**c, "source": resolve(c["source"]), "target": resolve(c.get("target"))})
        if c.layout is not None and c.layout not in LAYOUT_IDS:
            raise ConfigError(f"corpora[{k}]: unknown layout {c.layout!r}")
        corpora.append(c)
    systems = []
    for k, s in enumerate(raw["systems"] or []):
        _check_keys(s, ExternalSystemSpec, f"systems[{k}]")
        if s.get("id") in RESERVED_DIRS:
            raise ConfigError(f"systems[{k}]: id {s['id']!r} is reserved")
        try:
            systems.append(ExternalSystemSpec(**s))
        except (TypeError, ValueError) as e:
            raise ConfigError(f"systems[{k}]: {e}") from None
    metrics = []
    for k, m in enumerate(raw["metrics"] or []):
        _check_keys(m, MetricConfig, f"metrics[{k}]")
        m = MetricConfig(**m)
        if m.kind not in ("native", "external"):
            raise ConfigError(f"metrics[{k}]: kind must be 'native' or 'external'")
        if m.kind == "native" and m.id not in ("chrf", "bleu"):
            raise ConfigError(f"metrics[{k}]: native metrics are 'chrf' and 'bleu'")
        if m.kind == "external" and not m.scorer:
            raise ConfigError(f"metrics[{k}]: external metrics need a 'scorer' system id")
        if m.reference not in ("target", "source", "none"):
            raise ConfigError(f"metrics[{k}]: reference must be target, source or none")
        if m.kind == "native" and m.reference == "none":
            raise ConfigError(f"metrics[{k}]: native metrics need a reference")
        if m.policy not in SOURCE_POLICIES:
            raise ConfigError(f"metrics[{k}]: policy must be one of {SOURCE_POLICIES}")
        metrics.append(m)
    pipelines = []
    for k, p in enumerate(raw.get("pipelines") or []):
        _check_keys(p, PipelineConfig, f"pipelines[{k}]")
        pipelines.append(PipelineConfig(**p))
    noise_types = tuple(raw.get("noise_types", NOISE_TYPES))
    bad = [t for t in noise_types if t not in NOISE_TYPES]
    if bad:
        raise ConfigError(f"unknown noise types {bad}")
    seed = raw["seed"]
    if not isinstance(seed, int) or not 0 <= seed <= U64_MAX:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    cfg = ExperimentConfig(
        experiment=str(raw["experiment"]),
        seed=seed,
        corpora=tuple(corpora),
        systems=tuple(systems),
        metrics=tuple(metrics),
        noise_types=noise_types,
        pipelines=tuple(pipelines),
        output=resolve(raw.get("output", "runs")),
        tie_epsilon=float(raw.get("tie_epsilon", 0.0)),
        jobs=int(raw.get("jobs", 1)),
    )
    for m in cfg.metrics:
        if m.kind == "external" and cfg.system(m.scorer).kind != "scorer":
            raise ConfigError(f"metric {m.id}: system {m.scorer!r} is not a scorer")
    for p in cfg.pipelines:
        if cfg.system(p.corrector).kind != "corrector" or cfg.system(p.translator).kind != "translator":
            raise ConfigError(f"pipeline {p.corrector}+{p.translator}: wrong system kinds")
    if "key" in cfg.noise_types:
        for c in cfg.corpora:
            if c.key_layout is None:
                raise ConfigError(f"corpus {c.id}: key noise needs a layout for language {c.src_lang!r}")
    return cfg


def load_config(path: "str | Path") -> ExperimentConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text("utf-8"))
    except yaml.YAMLError as e:
        raise ConfigError(f"{path}: {e}") from None
    return parse_config(raw, path.parent)


@dataclass
class ExperimentResult:
    root: Path
    runs: list[RunRecord] = field(default_factory=list)
    trajectories: list[Trajectory] = field(default_factory=list)
    breakdowns: dict = field(default_factory=dict)
    report_files: list[Path] = field(default_factory=list)


def _level_id(corpus_id: str, noise_type: str, p: float) -> str:
    return f"{corpus_id}.{noise_type}.p{p:.1f}"


def prepare_inputs(cfg: ExperimentConfig, root: Path, jobs: int) -> tuple[dict, dict, list[CorpusInput]]:
    bases: dict[str, list[str]] = {}
    targets: dict[str, list[str]] = {}
    inputs = []
    for c in cfg.corpora:
        segments = load_plain_corpus(c.source)
        bases[c.id] = [s.text for s in segments]
        if c.target is not None:
            tgt = load_plain_corpus(c.target, side="target")
            if len(tgt) != len(segments):
                raise ValueError(f"corpus {c.id}: {len(segments)} source vs {len(tgt)} target lines")
            targets[c.id] = [s.text for s in tgt]
        inputs.append(CorpusInput(f"{c.id}.clean", bases[c.id], {"base": c.id, "noise": None}, c.src_lang, c.tgt_lang))
        for t in cfg.noise_types:
            layout = c.key_layout if t == "key" else None
            ladder, _ = write_ladder(segments, t, layout, cfg.seed, root / "corpora" / c.id / t, base=c.id, jobs=jobs)
            for noised in ladder:
                spec = noised.noise
                prov = {
                    "base": c.id,
                    "noise": {
                        "type": t,
                        "p": spec.p,
                        "seed": spec.seed,
                        "layout": layout,
                        "layout_sha256": noised.layout_checksum,
                    },
                }
                inputs.append(CorpusInput(_level_id(c.id, t, spec.p), noised.texts(), prov, c.src_lang, c.tgt_lang))
    return bases, targets, inputs


def run_experiment(cfg: ExperimentConfig, jobs: int | None = None) -> ExperimentResult:
    """Noise ladders -> translate (and correct) -> score -> slopes -> report.

    Finished runs and score files are reused, so re-running a completed
    experiment makes no external calls.
    """
    jobs = cfg.jobs if jobs is None else jobs
    root = Path(cfg.output) / cfg.experiment
    result = ExperimentResult(root)
    bases, targets, inputs = prepare_inputs(cfg, root, jobs)

    by_label: dict[str, list[RunRecord]] = {}
    for system in cfg.systems:
        if system.kind == "translator":
            by_label[system.id] = translate_ladder(system, inputs, root)
    for p in cfg.pipelines:
        corrector, translator = cfg.system(p.corrector), cfg.system(p.translator)
        by_label[f"{corrector.id}+{translator.id}"] = correction_ladder(corrector, translator, inputs, root)
    for records in by_label.values():
        result.runs.extend(records)

    scores: dict[tuple[str, str], dict[str, Any]] = {}
    for m in cfg.metrics:
        refs_for = bases if m.reference == "source" else targets
        for label, records in by_label.items():
            if m.kind == "native":
                files = [score_native(m.id, r, refs_for[r.provenance["base"]]) for r in records]
            else:
                refs = None if m.reference == "none" else refs_for
                files = score_runs(cfg.system(m.scorer), records, m.policy, bases, refs, metric=m.id)
            for r, sf in zip(records, files):
                scores.setdefault((label, m.id), {})[r.corpus_id] = sf

    result.trajectories = collect_trajectories(root)

    if cfg.metrics:
        first = cfg.metrics[0].id
        for p in cfg.pipelines:
            label = f"{p.corrector}+{p.translator}"
            base_runs = {r.corpus_id: r for r in by_label[p.translator]}
            pipe_runs = {r.corpus_id: r for r in by_label[label]}
            rows = []
            oracle_rows = []
            for c in inputs:
                a = scores[(p.translator, first)][c.id]
                b = scores[(label, first)][c.id]
                level = c.provenance["noise"]["p"] if c.provenance["noise"] else 0.0
                noise_type = c.provenance["noise"]["type"] if c.provenance["noise"] else "clean"
                wl = win_loss(a, b, cfg.tie_epsilon, p=level)
                rows.append((noise_type, wl))
                sel = oracle_select(a, b, base_runs[c.id].outputs, pipe_runs[c.id].outputs)
                oracle_rows.append((c.id, a.mean(), b.mean(), sel.mean, sum(sel.mask)))
            for noise_type in sorted({t for t, _ in rows}):
                result.breakdowns[f"{label}:{first}:{noise_type}"] = [wl for t, wl in rows if t == noise_type]
            _write_oracle_csv(root / "report" / f"oracle__{label}__{first}.csv", oracle_rows)

    result.report_files = emit_report(result.trajectories, root / "report", breakdowns=result.breakdowns)
    return result


def _write_oracle_csv(path: Path, rows: Sequence[tuple]) -> None:
    lines = ["corpus_id,baseline_mean,pipeline_mean,oracle_mean,pipeline_selected"]
    for cid, a, b, o, k in rows:
        lines.append(f"{cid},{format_score(a)},{format_score(b)},{format_score(o)},{k}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def collect_trajectories(root: "str | Path") -> list[Trajectory]:
    """Rebuild trajectories from the run directories under ``root``.

    A run directory is ``<root>/<system>/<corpus-id>/`` with a successful
    ``run.json``; each ``scores/<metric>.tsv`` contributes one point.
    """
    root = Path(root)
    if not root.exists():
        return []
    cells: dict[tuple[str, str, str], dict] = {}
    multi_base = set()
    for meta_path in sorted(root.glob("*/*/run.json")):
        if meta_path.parts[-3] in RESERVED_DIRS:
            continue
        meta = json.loads(meta_path.read_text("utf-8"))
        if meta.get("exit_status") != 0:
            continue
        prov = meta["provenance"]
        multi_base.add(prov["base"])
        noise = prov.get("noise")
        for tsv in sorted((meta_path.parent / "scores").glob("*.tsv")):
            sf = read_score_file(tsv)
            cell = cells.setdefault((meta["system"], prov["base"], tsv.stem), {"clean": None, "levels": {}})
            value = corpus_value(sf)
            if noise is None:
                cell["clean"] = value
            else:
                cell["levels"].setdefault(noise["type"], []).append((noise["p"], value))
    out = []
    for (system, base, metric), cell in sorted(cells.items()):
        if cell["clean"] is None:
            log.warning("no clean run for %s/%s/%s; skipped", system, base, metric)
            continue
        label = f"{system}@{base}" if len(multi_base) > 1 else system
        for noise_type, levels in sorted(cell["levels"].items()):
            out.append(build_trajectory(cell["clean"], levels, label, metric, noise_type))
    return out


def report_from_runs(root: "str | Path", out_dir: "str | Path | None" = None) -> list[Path]:
    root = Path(root)
    return emit_report(collect_trajectories(root), Path(out_dir) if out_dir else root / "report")
