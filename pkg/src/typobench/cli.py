"""``typobench`` command line.

Every subcommand accepts ``--config FILE``: a YAML/JSON mapping from
option names (as in ``--help``, dashes or underscores) to values.
Flags given on the command line win over the file. Exit codes: 0 ok,
1 data error (one ``error: {json}`` line on stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from importlib import resources
from pathlib import Path

import yaml

from .analysis import fit_slope
from .corpus_io import (
    load_plain_corpus,
    read_score_file,
    write_noised_jsonl,
    write_plain_corpus,
)
from .datagen import (
    make_correction_training_set,
    make_mt_training_set,
    make_validation_set,
    write_training_pairs,
)
from .metrics import (
    BleuParams,
    ChrfParams,
    bleu,
    chrf,
    delta_qe,
    faux_metric,
    fertility,
    get_tokenizer,
    token_f1,
)
from .noise import noise_corpus, write_ladder
from .types import LAYOUT_IDS, NOISE_TYPES, MixSpec, NoiseSpec, SchemaError

log = logging.getLogger("typobench")

METRICS = ("chrf", "bleu", "token-f1", "delta-qe", "faux-bleu", "faux-chrf", "faux-external")


class UsageError(Exception):
    pass


def _opt(p: argparse.ArgumentParser, *flags, default=None, **kw):
    """Options default to None so config values can fill the gaps; real defaults live in ``p.real_defaults``."""
    action = p.add_argument(*flags, default=None, **kw)
    if default is not None:
        p.real_defaults[action.dest] = default
        if action.help:
            action.help += f" (default: {default})"
    return action


def _subparser(sub, name: str, help: str, func) -> argparse.ArgumentParser:
    p = sub.add_parser(name, help=help, description=help)
    p.real_defaults = {}
    p.required_opts = []
    p.add_argument("--config", help="YAML/JSON file with option values; flags override it")
    p.set_defaults(func=func)
    return p


def _require(p, *dests):
    p.required_opts.extend(dests)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="typobench", description="Character-noise robustness toolkit for MT.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = _subparser(sub, "noise", "noise one corpus at a single level", cmd_noise)
    _opt(p, "--in", dest="input", help="clean corpus, one segment per line")
    _opt(p, "--out", help="noised plain-text output")
    _opt(p, "--jsonl", help="noised corpus with provenance (default: <out>.jsonl)")
    _opt(p, "--type", dest="noise_type", choices=NOISE_TYPES, help="noise type")
    _opt(p, "--p", type=float, help="per-token perturbation probability in [0, 1]")
    _opt(p, "--seed", type=int, default=0, help="random seed")
    _opt(p, "--layout", choices=LAYOUT_IDS, help="keyboard layout (required for key noise)")
    _opt(p, "--base", help="corpus id recorded as provenance (default: input path)")
    _opt(p, "--jobs", type=int, default=1, help="worker processes; output does not depend on it")
    _require(p, "input", "out", "noise_type", "p")

    p = _subparser(sub, "ladder", "write the ten-level noise ladder p=0.1..1.0 plus a manifest", cmd_ladder)
    _opt(p, "--in", dest="input", help="clean corpus, one segment per line")
    _opt(p, "--out-dir", help="directory for p0.1.jsonl ... p1.0.jsonl and manifest.json")
    _opt(p, "--type", dest="noise_type", choices=NOISE_TYPES, help="noise type")
    _opt(p, "--seed", type=int, default=0, help="random seed")
    _opt(p, "--layout", choices=LAYOUT_IDS, help="keyboard layout (required for key noise)")
    _opt(p, "--base", help="corpus id recorded as provenance (default: input path)")
    _opt(p, "--jobs", type=int, default=1, help="worker processes; output does not depend on it")
    _require(p, "input", "out_dir", "noise_type")

    p = _subparser(sub, "eval", "score hypotheses with a native or composite metric", cmd_eval)
    _opt(p, "--metric", choices=METRICS, help="metric to compute")
    _opt(p, "--hyp", help="hypothesis file (noisy-source translations for faux metrics)")
    _opt(p, "--ref", help="reference file (clean-source translations for faux metrics)")
    _opt(p, "--scores", help="score TSV for faux-external")
    _opt(p, "--qe-clean", help="QE score TSV of clean-source translations (delta-qe)")
    _opt(p, "--qe-noisy", help="QE score TSV of noisy-source translations (delta-qe)")
    _opt(p, "--char-order", type=int, default=6, help="chrF character n-gram order")
    _opt(p, "--word-order", type=int, default=0, help="chrF word n-gram order")
    _opt(p, "--beta", type=float, default=2.0, help="chrF beta")
    _opt(p, "--whitespace", action="store_true", help="keep whitespace in chrF character n-grams")
    _opt(p, "--no-effective-order", action="store_true", help="chrF: average over all orders")
    _opt(p, "--bleu-order", type=int, default=4, help="BLEU max n-gram order")
    _opt(p, "--smoothing", choices=("exp", "none"), default="exp", help="BLEU smoothing")
    _opt(p, "--tokenizer", choices=("whitespace", "char", "pretokenized"), default="whitespace", help="BLEU tokenizer")
    _require(p, "metric")

    p = _subparser(sub, "slope", "fit a through-origin robustness slope to a trajectory CSV", cmd_slope)
    _opt(p, "--trajectory", help="CSV with columns p,score; the p=0 row is the clean score")
    _opt(p, "--example", action="store_true", help="use the bundled example trajectory")
    _opt(p, "--json", action="store_true", help="print slope, n_points and rss as JSON")

    p = _subparser(sub, "fertility", "subword pieces per whitespace word", cmd_fertility)
    _opt(p, "--in", dest="input", help="corpus, one segment per line")
    _opt(p, "--tokenizer", choices=("whitespace", "char", "bpe"), default="whitespace", help="piece function")
    _opt(p, "--merges", help="BPE merges file ('left right' per line)")
    _require(p, "input")

    p = _subparser(sub, "gen-train", "generate noisy finetuning or validation data", cmd_gen_train)
    _opt(p, "--task", choices=("translation", "correction", "validation"), help="what to generate")
    _opt(p, "--src", help="clean source corpus")
    _opt(p, "--tgt", help="clean target corpus (translation task)")
    _opt(p, "--rates", default="swap=0.15,dupe=0.15,drop=0.15,key=0.15", help="per-type token rates")
    _opt(p, "--validation-rate", type=float, default=0.2, help="per-type rate for the validation copy")
    _opt(p, "--sample-size", type=int, help="pairs to sample (default: whole corpus)")
    _opt(p, "--seed", type=int, default=0, help="random seed")
    _opt(p, "--layout", choices=LAYOUT_IDS, help="keyboard layout for key noise")
    _opt(p, "--out-prefix", help="writes <prefix>.input.txt, .output.txt, .provenance.jsonl, .manifest.json")
    _require(p, "task", "src", "out_prefix")

    p = _subparser(sub, "pipeline", "run an experiment manifest: ladder, translate, correct, score, report", cmd_pipeline)
    _opt(p, "--manifest", help="experiment manifest (YAML/JSON)")
    _opt(p, "--output", help="override the manifest's output directory")
    _opt(p, "--jobs", type=int, help="worker processes for noising; output does not depend on it")
    _require(p, "manifest")

    p = _subparser(sub, "report", "rebuild report.csv and charts from an experiment run directory", cmd_report)
    _opt(p, "--runs", help="experiment directory (<output>/<experiment>)")
    _opt(p, "--out", help="report directory (default: <runs>/report)")
    _require(p, "runs")
    return parser


def _merge_config(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    sub = parser._subparsers._group_actions[0].choices[args.command]
    dests = {a.dest for a in sub._actions} - {"help", "config", "func"}
    if args.config:
        try:
            raw = yaml.safe_load(Path(args.config).read_text("utf-8")) or {}
        except (OSError, yaml.YAMLError) as e:
            raise UsageError(f"cannot read config {args.config}: {e}") from None
        if not isinstance(raw, dict):
            raise UsageError("config file must be a mapping")
        for key, value in raw.items():
            dest = key.replace("-", "_")
            if dest == "in":
                dest = "input"
            if dest == "type":
                dest = "noise_type"
            if dest not in dests:
                raise UsageError(f"unknown config key {key!r} for '{args.command}'")
            if getattr(args, dest) is None:
                setattr(args, dest, value)
    for dest, value in sub.real_defaults.items():
        if getattr(args, dest) is None:
            setattr(args, dest, value)
    for dest in sub.required_opts:
        if getattr(args, dest) is None:
            flag = next(a.option_strings[0] for a in sub._actions if a.dest == dest)
            raise UsageError(f"'{args.command}' requires {flag}")


def _emit_error(kind: str, message: str) -> None:
    print("error: " + json.dumps({"kind": kind, "message": message}, ensure_ascii=False), file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        _merge_config(parser, args)
        return args.func(args) or 0
    except UsageError as e:
        parser._subparsers._group_actions[0].choices[args.command].print_usage(sys.stderr)
        print(f"typobench {args.command}: error: {e}", file=sys.stderr)
        return 2
    except (ValueError, OSError, LookupError, RuntimeError) as e:
        _emit_error(type(e).__name__, str(e))
        return 1


# subcommands --------------------------------------------------------------


def cmd_noise(args) -> int:
    if args.noise_type == "key" and args.layout is None:
        raise UsageError("--type key requires --layout")
    if not 0.0 <= float(args.p) <= 1.0:
        raise UsageError("--p must lie in [0, 1]")
    segments = load_plain_corpus(args.input)
    spec = NoiseSpec(args.noise_type, args.p, args.seed, args.layout)
    corpus = noise_corpus(segments, spec, base=args.base or str(args.input), jobs=args.jobs)
    write_plain_corpus(args.out, corpus.texts())
    write_noised_jsonl(corpus, args.jsonl or f"{args.out}.jsonl")
    return 0


def cmd_ladder(args) -> int:
    if args.noise_type == "key" and args.layout is None:
        raise UsageError("--type key requires --layout")
    segments = load_plain_corpus(args.input)
    _, manifest = write_ladder(
        segments, args.noise_type, args.layout, args.seed, args.out_dir, base=args.base or str(args.input), jobs=args.jobs
    )
    for level in manifest["levels"]:
        print(f"{level['file']}\t{level['attempted']}/{level['tokens']} tokens attempted")
    return 0


def _texts(path) -> list[str]:
    return [s.text for s in load_plain_corpus(path)]


def cmd_eval(args) -> int:
    metric = args.metric
    chrf_params = ChrfParams(args.char_order, args.word_order, args.beta, bool(args.whitespace), not args.no_effective_order)
    bleu_params = BleuParams(args.bleu_order, args.smoothing, args.tokenizer)
    if metric == "delta-qe":
        if not (args.qe_clean and args.qe_noisy):
            raise UsageError("delta-qe needs --qe-clean and --qe-noisy")
        score = delta_qe(read_score_file(args.qe_clean), read_score_file(args.qe_noisy))
    elif metric == "faux-external":
        if not args.scores:
            raise UsageError("faux-external needs --scores")
        score = faux_metric(read_score_file(args.scores), base="external")
    else:
        if not (args.hyp and args.ref):
            raise UsageError(f"{metric} needs --hyp and --ref")
        hyp, ref = _texts(args.hyp), _texts(args.ref)
        if len(hyp) != len(ref):
            raise ValueError(f"{len(hyp)} hypothesis lines vs {len(ref)} reference lines")
        if metric == "chrf":
            score = chrf(hyp, ref, chrf_params)
        elif metric == "bleu":
            score = bleu(hyp, ref, bleu_params)
        elif metric == "token-f1":
            if not hyp:
                raise ValueError("token-f1 of an empty corpus")
            score = sum(token_f1(h.split(), r.split()) for h, r in zip(hyp, ref)) / len(hyp)
        else:
            score = faux_metric(hyp, ref, base=metric.split("-")[1], bleu_params=bleu_params, chrf_params=chrf_params)
    print(score)
    return 0


def read_trajectory_csv(path) -> list[tuple[float, float]]:
    with open(path, encoding="utf-8", newline="") as f:
        rows = list(csv.DictReader(f))
    if not rows or "p" not in rows[0] or "score" not in rows[0]:
        raise SchemaError(f"{path}: expected CSV columns p,score")
    return [(float(r["p"]), float(r["score"])) for r in rows]


def example_trajectory_path():
    return resources.files("typobench").joinpath("data", "example_trajectory.csv")


def cmd_slope(args) -> int:
    if args.example:
        with resources.as_file(example_trajectory_path()) as path:
            rows = read_trajectory_csv(path)
    elif args.trajectory:
        rows = read_trajectory_csv(args.trajectory)
    else:
        raise UsageError("give --trajectory FILE or --example")
    clean = [s for p, s in rows if p == 0]
    if len(clean) != 1:
        raise ValueError("trajectory needs exactly one clean row with p=0")
    fit = fit_slope([(p, s - clean[0]) for p, s in rows if p != 0])
    if args.json:
        print(json.dumps({"slope": fit.slope, "n_points": fit.n_points, "rss": fit.rss}))
    else:
        print(fit.slope)
    return 0


def cmd_fertility(args) -> int:
    tokenizer = get_tokenizer(args.tokenizer, args.merges)
    print(fertility(load_plain_corpus(args.input), tokenizer))
    return 0


def parse_rates(text: str) -> dict:
    rates = {}
    for part in str(text).split(","):
        if not part.strip():
            continue
        name, eq, value = part.partition("=")
        if not eq or name.strip() not in NOISE_TYPES:
            raise UsageError(f"bad rate {part!r}; expected e.g. swap=0.15")
        rates[name.strip()] = float(value)
    return rates


def cmd_gen_train(args) -> int:
    src = load_plain_corpus(args.src)
    if args.task == "validation":
        if args.layout is None and args.validation_rate > 0:
            raise UsageError("the validation copy includes key noise; give --layout")
        combined, pairs = make_validation_set(src, args.seed, args.layout, args.validation_rate)
        mix = MixSpec({t: args.validation_rate for t in NOISE_TYPES}, args.seed, args.layout)
        prefix = Path(args.out_prefix)
        write_plain_corpus(prefix.with_name(prefix.name + ".txt"), combined)
        write_training_pairs(pairs, prefix, mix, [s.text for s in src], {"task": "validation", "clean_segments": len(src)})
        return 0
    rates = parse_rates(args.rates)
    if rates.get("key", 0) > 0 and args.layout is None:
        raise UsageError("key noise requires --layout")
    mix = MixSpec(rates, args.seed, args.layout)
    size = len(src) if args.sample_size is None else args.sample_size
    if args.task == "translation":
        if not args.tgt:
            raise UsageError("translation task needs --tgt")
        pairs = list(make_mt_training_set(src, load_plain_corpus(args.tgt, side="target"), mix, size))
    else:
        pairs = list(make_correction_training_set(src, mix, size))
    write_training_pairs(pairs, args.out_prefix, mix, [s.text for s in src], {"task": args.task, "sample_size": size})
    return 0


def cmd_pipeline(args) -> int:
    import dataclasses

    from .pipeline.experiment import load_config, run_experiment

    cfg = load_config(args.manifest)
    if args.output:
        cfg = dataclasses.replace(cfg, output=args.output)
    result = run_experiment(cfg, jobs=args.jobs)
    reused = sum(r.reused for r in result.runs)
    print(f"{len(result.runs)} runs ({reused} reused); report in {result.root / 'report'}")
    return 0


def cmd_report(args) -> int:
    from .pipeline.experiment import report_from_runs

    runs = Path(args.runs)
    if not runs.is_dir():
        raise FileNotFoundError(f"run directory {runs} does not exist")
    for path in report_from_runs(runs, args.out):
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
