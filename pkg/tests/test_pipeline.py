import json
import random

import pytest
import yaml

from conftest import DEMO_EN, ROOT, mock

DEMO_MANIFEST = ROOT / "scripts" / "demo_manifest.yaml"
from typobench.noise import make_noise_ladder
from typobench.pipeline import (
    ConfigError,
    CorpusInput,
    ExternalSystemError,
    ExternalSystemSpec,
    MissingBaseCorpusError,
    correction_ladder,
    correction_pipeline,
    load_config,
    oracle_select,
    parse_config,
    run_experiment,
    run_external,
    score_native,
    score_runs,
    translate,
    translate_ladder,
)
from typobench.metrics import chrf, delta_qe
from typobench.types import ScoreFile, Segment

CLEAN = ["the cat sat on the mat", "a quick brown fox", "hello world again"]


def clean_input(texts=CLEAN, base="toy"):
    return CorpusInput(f"{base}.clean", texts, {"base": base, "noise": None}, "en", "de")


def ladder_inputs(texts=CLEAN, noise_type="swap", base="toy", seed=3):
    segs = [Segment(k, t) for k, t in enumerate(texts)]
    out = [clean_input(texts, base)]
    for c in make_noise_ladder(segs, noise_type, None, seed, base=base):
        out.append(
            CorpusInput(
                f"{base}.{noise_type}.p{c.noise.p:.1f}",
                c.texts(),
                {"base": base, "noise": {"type": noise_type, "p": c.noise.p, "seed": c.noise.seed}},
                "en",
                "de",
            )
        )
    return out


class TestExternal:
    def test_echo(self):
        reqs = [{"src": t, "src_lang": "en", "tgt_lang": "de"} for t in CLEAN + ["Grüße, 세계"]]
        assert run_external(mock("echo", "translator", "echo"), reqs) == CLEAN + ["Grüße, 세계"]

    def test_const_scorer(self):
        out = run_external(mock("c", "scorer", "const", "--value", "0.5"), [{"src": "a", "mt": "b"}] * 4)
        assert out == [0.5] * 4

    def test_dropped_line_names_offset(self):
        spec = mock("skip", "translator", "skip", "--offset", "2")
        with pytest.raises(ExternalSystemError, match="offset 4") as e:
            run_external(spec, [{"src": str(k)} for k in range(5)])
        assert e.value.kind == "line_count"
        assert e.value.partial == ["0", "1", "3", "4"]

    def test_nonzero_exit(self):
        with pytest.raises(ExternalSystemError) as e:
            run_external(mock("f", "translator", "fail"), [{"src": "a"}])
        assert e.value.kind == "exit"
        assert "mock failure" in e.value.stderr

    def test_timeout(self):
        with pytest.raises(ExternalSystemError) as e:
            run_external(mock("h", "translator", "hang", timeout=1.0), [{"src": "a"}])
        assert e.value.kind == "timeout"

    def test_unparseable_score(self):
        with pytest.raises(ExternalSystemError) as e:
            run_external(mock("g", "scorer", "garbage"), [{"src": "a", "mt": "b"}])
        assert e.value.kind == "parse"

    def test_backpressure_window_of_one(self):
        reqs = [{"src": f"line {k}"} for k in range(300)]
        assert run_external(mock("e", "translator", "echo", batch_size=1), reqs) == [r["src"] for r in reqs]

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            ExternalSystemSpec("x", "translator", ())
        with pytest.raises(ValueError):
            ExternalSystemSpec("x", "translator", ("a",), timeout=0)
        with pytest.raises(ValueError):
            ExternalSystemSpec("x", "oracle", ("a",))


class TestRuns:
    def test_echo_translation(self, tmp_path):
        rec = translate(mock("echo", "translator", "echo"), clean_input(), tmp_path)
        assert rec.outputs == CLEAN
        run_json = json.loads((tmp_path / "echo" / "toy.clean" / "run.json").read_text("utf-8"))
        assert run_json["exit_status"] == 0
        assert (tmp_path / "echo" / "toy.clean" / "output.txt").read_text("utf-8") == "".join(t + "\n" for t in CLEAN)

    def test_ladder_resume_makes_no_calls(self, tmp_path):
        log = tmp_path / "calls.log"
        spec = mock("echo", "translator", "echo", "--log", str(log))
        inputs = ladder_inputs()
        first = translate_ladder(spec, inputs, tmp_path / "runs")
        assert len(first) == 11
        for rec, c in zip(first, inputs):
            assert len(rec.outputs) == len(c.texts)
            assert rec.outputs == list(c.texts)
        calls = log.read_text().count("\n")
        snapshot = {p: p.read_bytes() for p in (tmp_path / "runs").rglob("*") if p.is_file()}
        again = translate_ladder(spec, inputs, tmp_path / "runs")
        assert log.read_text().count("\n") == calls
        assert all(r.reused for r in again)
        assert {p: p.read_bytes() for p in (tmp_path / "runs").rglob("*") if p.is_file()} == snapshot

    def test_failed_run_persists_partial(self, tmp_path):
        spec = mock("skip", "translator", "skip", "--offset", "1")
        with pytest.raises(ExternalSystemError):
            translate(spec, clean_input(), tmp_path)
        d = tmp_path / "skip" / "toy.clean"
        assert json.loads((d / "run.json").read_text("utf-8"))["exit_status"] != 0
        assert (d / "output.partial.txt").exists()
        assert not (d / "output.txt").exists()

    def test_changed_input_is_rerun(self, tmp_path):
        log = tmp_path / "calls.log"
        spec = mock("echo", "translator", "echo", "--log", str(log))
        translate(spec, clean_input(), tmp_path)
        rec = translate(spec, clean_input(CLEAN[:2] + ["different"]), tmp_path)
        assert log.read_text().count("\n") == 2
        assert rec.outputs[-1] == "different" and not rec.reused

    def test_identity_pipeline_equals_translator(self, tmp_path):
        inputs = ladder_inputs()
        direct = translate_ladder(mock("up", "translator", "upper"), inputs, tmp_path)
        piped = correction_ladder(mock("id", "corrector", "identity"), mock("up", "translator", "upper"), inputs, tmp_path)
        assert [r.outputs for r in piped] == [r.outputs for r in direct]

    def test_oracle_corrector_feeds_clean_text(self, tmp_path):
        clean_file = tmp_path / "clean.txt"
        clean_file.write_text("".join(t + "\n" for t in CLEAN), encoding="utf-8")
        capture = tmp_path / "seen.jsonl"
        translator = mock("cap", "translator", "echo", "--capture", str(capture))
        noisy = ladder_inputs()[-1]
        assert list(noisy.texts) != CLEAN
        rec = correction_pipeline(mock("perfect", "corrector", "oracle", "--clean", str(clean_file)), translator, noisy, tmp_path)
        seen = [json.loads(x)["src"] for x in capture.read_text("utf-8").splitlines()]
        assert seen == CLEAN
        assert rec.outputs == CLEAN
        assert rec.extra["original_inputs"] == list(noisy.texts)


class TestScoring:
    def test_clean_source_policy_sends_clean_text(self, tmp_path):
        inputs = ladder_inputs()
        runs = translate_ladder(mock("echo", "translator", "echo"), inputs, tmp_path)
        capture = tmp_path / "scorer.jsonl"
        scorer = mock("cap", "scorer", "const", "--capture", str(capture))
        files = score_runs(scorer, runs, "clean_source", {"toy": CLEAN})
        assert all(f.as_dict() == {0: 0.5, 1: 0.5, 2: 0.5} for f in files)
        reqs = [json.loads(x) for x in capture.read_text("utf-8").splitlines()]
        assert len(reqs) == 11 * len(CLEAN)
        assert [r["src"] for r in reqs] == CLEAN * 11
        assert [r["mt"] for r in reqs] == [t for c in inputs for t in c.texts]

    def test_policies_agree_on_clean_run(self, tmp_path):
        run = translate(mock("echo", "translator", "echo"), clean_input(), tmp_path)
        from typobench.pipeline.runs import scorer_requests

        assert scorer_requests(run, "clean_source", {"toy": CLEAN}) == scorer_requests(run, "actual_source", {})

    def test_missing_base(self, tmp_path):
        run = translate(mock("echo", "translator", "echo"), clean_input(), tmp_path)
        with pytest.raises(MissingBaseCorpusError):
            score_runs(mock("c", "scorer", "const"), [run], "clean_source", {})

    def test_delta_qe_nonnegative_with_edit_distance_qe(self, tmp_path):
        # QE = -(edit distance from the translation to the clean source); the copy
        # translator on clean input is perfect, so every noisy run scores lower
        runs = translate_ladder(mock("echo", "translator", "echo"), ladder_inputs(), tmp_path)
        files = score_runs(mock("qe", "scorer", "neg-edit"), runs, "clean_source", {"toy": CLEAN})
        clean = files[0]
        assert clean.as_dict() == {0: 0.0, 1: 0.0, 2: 0.0}
        for f in files[1:]:
            assert delta_qe(clean, f) >= 0
        assert delta_qe(clean, files[-1]) > 0

    def test_score_reuse(self, tmp_path):
        log = tmp_path / "calls.log"
        runs = translate_ladder(mock("echo", "translator", "echo"), ladder_inputs(), tmp_path)
        scorer = mock("c", "scorer", "const", "--log", str(log))
        score_runs(scorer, runs, "clean_source", {"toy": CLEAN})
        score_runs(scorer, runs, "clean_source", {"toy": CLEAN})
        assert log.read_text().count("\n") == 1

    def test_native_chrf(self, tmp_path):
        run = translate(mock("echo", "translator", "echo"), ladder_inputs()[-1], tmp_path)
        sf = score_native("chrf", run, CLEAN)
        assert len(sf.rows) == 3
        assert (run.directory / "scores" / "chrf.tsv").exists()
        from typobench.pipeline.runs import corpus_value

        assert corpus_value(sf) == chrf(run.outputs, CLEAN)


class TestOracle:
    def test_a_dominates(self):
        sel = oracle_select([3.0, 2.0], [1.0, 2.0], ["a0", "a1"], ["b0", "b1"])
        assert sel.outputs == ("a0", "a1") and sel.mask == (False, False)

    def test_alternating(self):
        sel = oracle_select([1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0], list("aaaa"), list("bbbb"))
        assert sel.mask == (False, True, False, True)
        assert sel.outputs == ("a", "b", "a", "b")

    def test_elementwise_max(self):
        rng = random.Random(2)
        for _ in range(200):
            n = rng.randint(1, 40)
            a = [rng.uniform(0, 1) for _ in range(n)]
            b = [rng.uniform(0, 1) for _ in range(n)]
            sel = oracle_select(a, b, [""] * n, [""] * n)
            assert list(sel.scores) == [max(x, y) for x, y in zip(a, b)]

    def test_score_files_aligned_by_index(self):
        a = ScoreFile("a", "m", ((1, 0.9), (0, 0.1)))
        b = ScoreFile("b", "m", ((0, 0.5), (1, 0.5)))
        sel = oracle_select(a, b, ["a0", "a1"], ["b0", "b1"])
        assert sel.outputs == ("b0", "a1")


def _manifest(tmp_path, **overrides):
    raw = yaml.safe_load(DEMO_MANIFEST.read_text("utf-8"))
    raw["corpora"][0]["source"] = str(DEMO_EN)
    raw["output"] = str(tmp_path / "runs")
    raw.update(overrides)
    return raw


class TestExperiment:
    def test_unknown_key_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            parse_config(_manifest(tmp_path, colour="blue"))

    def test_reserved_system_id(self, tmp_path):
        raw = _manifest(tmp_path)
        raw["systems"][0]["id"] = "report"
        with pytest.raises(ConfigError):
            parse_config(raw)

    def test_key_noise_needs_layout(self, tmp_path):
        raw = _manifest(tmp_path)
        raw["corpora"][0]["src_lang"] = "xx"
        with pytest.raises(ConfigError):
            parse_config(raw)

    def test_load_demo_manifest(self):
        cfg = load_config(DEMO_MANIFEST)
        assert cfg.experiment == "demo" and len(cfg.systems) == 3

    def test_small_experiment(self, tmp_path):
        src = tmp_path / "src.txt"
        src.write_text("".join(t + "\n" for t in CLEAN), encoding="utf-8")
        raw = _manifest(tmp_path, noise_types=["drop"])
        raw["corpora"][0]["source"] = str(src)
        res = run_experiment(parse_config(raw))
        root = tmp_path / "runs" / "demo"
        assert (root / "corpora" / "demo-en" / "drop" / "manifest.json").exists()
        assert (root / "report" / "report.csv").exists()
        assert (root / "report" / "oracle__identity-fix+copy__chrf.csv").exists()
        labels = {(t.system, t.metric) for t in res.trajectories}
        assert ("copy", "qe") in labels and ("identity-fix+copy", "chrf") in labels
        for t in res.trajectories:
            assert len(t.points) == 10
