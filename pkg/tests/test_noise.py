import random
import unicodedata
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fuzz_segments
from typobench.noise import (
    LADDER_LEVELS,
    attempt_stats,
    derive_rng,
    derive_seed,
    hangul_compose,
    hangul_decompose,
    load_layout,
    make_noise_ladder,
    mix_segment,
    noise_corpus,
    noise_segment,
    perturb_drop,
    perturb_dupe,
    perturb_key,
    perturb_swap,
    replay_segment,
    tokenize,
)
from typobench.noise.layouts import LayoutError, compute_adjacency, parse_layout
from typobench.types import LAYOUT_IDS, MixSpec, NoiseSpec, Segment

RNG = random.Random(0)


class TestRng:
    def test_same_triple_same_stream(self):
        a, b = derive_rng(5, 3, 7), derive_rng(5, 3, 7)
        assert [a.getrandbits(64) for _ in range(5)] == [b.getrandbits(64) for _ in range(5)]

    def test_no_first_draw_collisions(self):
        # 10^5 distinct triples; a 64-bit collision among them has probability ~3e-10
        seen = set()
        for seg in range(100):
            for tok in range(1000):
                seen.add(derive_rng(2024, seg, tok).getrandbits(64))
        assert len(seen) == 100_000

    def test_neighbouring_tokens_differ(self):
        assert derive_rng(1, 0, 0).getrandbits(64) != derive_rng(1, 0, 1).getrandbits(64)

    def test_derive_seed_distinguishes_types(self):
        assert derive_seed(1, "a") != derive_seed(1, "b")
        assert derive_seed(1, "ab") != derive_seed(1, "a", "b")
        assert 0 <= derive_seed(2**64 - 1, 3) < 2**64


class TestSwap:
    def test_forced(self):
        assert perturb_swap("abc", RNG, position=0)[0] == "bac"

    def test_two_chars(self):
        for s in range(20):
            assert perturb_swap("at", random.Random(s))[0] == "ta"

    def test_short_is_noop(self):
        assert perturb_swap("a", RNG) is None
        assert perturb_swap("", RNG) is None

    def test_position_frequencies(self):
        rng = random.Random(11)
        n = 100_000
        counts = Counter(perturb_swap("abcd", rng)[1] for _ in range(n))
        assert set(counts) == {0, 1, 2}
        for i in range(3):
            assert abs(counts[i] / n - 1 / 3) < 0.01

    @given(st.text(min_size=2, max_size=30), st.integers(0, 2**32))
    def test_multiset_and_length(self, token, seed):
        new, i, detail = perturb_swap(token, random.Random(seed))
        assert len(new) == len(token)
        assert Counter(new) == Counter(token)
        assert new[i : i + 2] == detail[::-1]


class TestDupe:
    def test_forced(self):
        assert perturb_dupe("ab", RNG, position=1)[0] == "abb"

    def test_single_char(self):
        assert perturb_dupe("x", RNG)[0] == "xx"

    def test_empty_is_noop(self):
        assert perturb_dupe("", RNG) is None

    @given(st.text(min_size=1, max_size=30), st.integers(0, 2**32))
    def test_length_plus_one(self, token, seed):
        new, i, detail = perturb_dupe(token, random.Random(seed))
        assert len(new) == len(token) + 1
        assert new[i] == new[i + 1] == detail


def _is_subsequence(small, big):
    it = iter(big)
    return all(c in it for c in small)


class TestDrop:
    def test_forced(self):
        assert perturb_drop("ab", RNG, position=0)[0] == "b"
        assert perturb_drop("noise", RNG, position=2)[0] == "nose"

    def test_single_char_is_noop(self):
        assert perturb_drop("a", RNG) is None

    @given(st.text(min_size=2, max_size=30), st.integers(0, 2**32))
    def test_subsequence(self, token, seed):
        new, i, detail = perturb_drop(token, random.Random(seed))
        assert len(new) == len(token) - 1
        assert _is_subsequence(new, token)
        assert token[i] == detail


class TestKey:
    def test_forced_cat(self):
        assert perturb_key("cat", RNG, load_layout("qwerty"), position=1, neighbor="s")[0] == "cst"

    def test_case_preserved(self):
        assert perturb_key("Zoo", RNG, load_layout("qwertz"), position=0, neighbor="t")[0] == "Too"

    @pytest.mark.parametrize("layout", LAYOUT_IDS)
    def test_digits_unmapped(self, layout):
        assert perturb_key("12", RNG, load_layout(layout)) is None

    def test_non_neighbour_rejected(self):
        with pytest.raises(ValueError):
            perturb_key("cat", RNG, load_layout("qwerty"), position=1, neighbor="p")

    @given(st.text(alphabet="abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ", min_size=1, max_size=15),
           st.integers(0, 2**32), st.sampled_from(["qwerty", "qwertz", "azerty"]))
    def test_latin_length_and_adjacency(self, token, seed, layout_id):
        layout = load_layout(layout_id)
        out = perturb_key(token, random.Random(seed), layout)
        if out is None:
            assert all(layout.key_for(c) is None for c in token)
            return
        new, i, detail = out
        assert len(new) == len(token)
        assert sum(a != b for a, b in zip(new, token)) == 1
        assert layout.key_for(detail) in layout.neighbors(token[i])
        assert detail.isupper() == token[i].isupper()

    def test_korean_replaces_one_jamo(self):
        layout = load_layout("dubeolsik")
        rng = random.Random(4)
        for _ in range(500):
            new, i, detail = perturb_key("한국어", rng, layout)
            before, after = hangul_decompose("한국어"), hangul_decompose(new)
            assert len(after) == len(before)
            diff = [k for k in range(len(before)) if before[k] != after[k]]
            assert diff == [i]
            assert layout.key_for(detail) in layout.neighbors(before[i])

    def test_korean_shifted_jamo(self):
        layout = load_layout("dubeolsik")
        assert layout.key_for("ㅃ") == "ㅂ"
        assert perturb_key("ㅃ", RNG, layout) is not None


class TestHangul:
    def test_han(self):
        assert hangul_decompose("한") == ["ㅎ", "ㅏ", "ㄴ"]

    def test_pass_through(self):
        assert hangul_decompose("cat") == ["c", "a", "t"]
        assert hangul_compose("cat") == "cat"

    def test_matches_unicode_names(self):
        # oracle: NFD to conjoining jamo, then the compatibility letter with the same name
        def oracle(s):
            out = []
            for c in unicodedata.normalize("NFD", s):
                name = unicodedata.name(c).split()[-1]
                out.append(unicodedata.lookup("HANGUL LETTER " + name))
            return out

        for code in range(0xAC00, 0xD7A4):
            s = chr(code)
            assert hangul_decompose(s) == oracle(s), s

    def test_mixed_text(self):
        s = "안녕하세요, world 123 값어치"
        assert hangul_compose(hangul_decompose(s)) == s

    def test_literal_jamo_kept(self):
        assert hangul_compose(["ㅏ", "ㄱ"]) == "ㅏㄱ"


class TestLayouts:
    @pytest.mark.parametrize("layout_id", LAYOUT_IDS)
    def test_symmetric_and_nonempty(self, layout_id):
        layout = load_layout(layout_id)
        for key, nbs in layout.adjacency.items():
            assert nbs
            assert key not in nbs
            for nb in nbs:
                assert key in layout.adjacency[nb]
        mapped = {c for row in layout.rows for c in row}
        assert set(layout.adjacency) == mapped

    def test_qwerty_neighbours(self):
        layout = load_layout("qwerty")
        assert set(layout.neighbors("a")) == {"q", "w", "s", "z", "x"}
        assert "t" not in layout.neighbors("z")
        assert "t" in load_layout("qwertz").neighbors("z")

    def test_checksum_is_file_hash(self):
        layout = load_layout("azerty")
        assert len(layout.checksum) == 64
        assert load_layout("azerty") is layout

    def test_asymmetric_file_rejected(self):
        text = "layout qwerty\nversion 1\nstagger 0\nrow ab\nadjacency\na: b\nb: a\n"
        assert parse_layout(text).neighbors("a") == ("b",)
        with pytest.raises(LayoutError):
            parse_layout(text.replace("b: a\n", "b: b\n"))

    def test_compute_adjacency_horizontal(self):
        adj = compute_adjacency(["abc"], [0.0])
        assert adj == {"a": ("b",), "b": ("a", "c"), "c": ("b",)}

    def test_unknown_layout(self):
        with pytest.raises(LayoutError):
            load_layout("dvorak")


class TestEngine:
    def test_tokenize_reassembles(self):
        text = "  a  bc\td "
        views = tokenize(text)
        assert [v.token for v in views] == ["a", "bc", "d"]
        for v in views:
            assert text[v.start : v.end] == v.token

    def test_p0_identity(self):
        text, records = noise_segment(Segment(0, "some  words\there"), NoiseSpec("swap", 0.0, 1))
        assert text == "some  words\there" and records == []

    def test_p1_swaps_everything(self):
        text, records = noise_segment(Segment(0, "ab cd"), NoiseSpec("swap", 1.0, 1))
        assert text == "ba dc"
        assert [r.token_index for r in records] == [0, 1]

    def test_ineligible_token_gets_noop_record(self):
        text, records = noise_segment(Segment(0, "a bc"), NoiseSpec("drop", 1.0, 1))
        assert text.split()[0] == "a"
        assert records[0].applied is False and records[0].char_position == -1
        assert records[1].applied is True

    def test_whitespace_preserved(self):
        src = "  Hello,\t\tbrave   new world  "
        text, _ = noise_segment(Segment(0, src), NoiseSpec("dupe", 1.0, 9))
        assert [m for m in src if m.isspace()] == [m for m in text if m.isspace()]
        assert text.startswith("  ") and text.endswith("  ")

    def test_attempt_rate(self):
        segs = [Segment(k, t) for k, t in enumerate(fuzz_segments(100_000, seed=3))]
        c = noise_corpus(segs, NoiseSpec("dupe", 0.3, 77))
        stats = attempt_stats(c, segs)
        assert stats["tokens"] == 100_000
        assert abs(stats["attempted"] / stats["tokens"] - 0.3) < 0.005

    def test_jobs_invariance(self):
        segs = [Segment(k, t) for k, t in enumerate(fuzz_segments(3000, seed=1))]
        spec = NoiseSpec("key", 0.5, 3, "qwerty")
        assert noise_corpus(segs, spec, jobs=1) == noise_corpus(segs, spec, jobs=4)

    def test_order_invariance(self):
        segs = [Segment(k, t) for k, t in enumerate(fuzz_segments(500, seed=2))]
        spec = NoiseSpec("swap", 0.5, 3)
        fwd = {s.index: s for s in noise_corpus(segs, spec).segments}
        rev = {s.index: s for s in noise_corpus(segs[::-1], spec).segments}
        assert fwd == rev

    def test_empty_ladder(self):
        ladder = make_noise_ladder([], "swap", None, 1)
        assert len(ladder) == 10
        assert all(c.segments == () for c in ladder)
        assert [c.noise.p for c in ladder] == list(LADDER_LEVELS)

    def test_ladder_deterministic_and_seeds_distinct(self):
        segs = [Segment(k, t) for k, t in enumerate(fuzz_segments(200, seed=5))]
        a = make_noise_ladder(segs, "drop", None, 42)
        assert a == make_noise_ladder(segs, "drop", None, 42)
        assert len({c.noise.seed for c in a}) == 10

    def test_ladder_monotone(self):
        segs = [Segment(k, t) for k, t in enumerate(fuzz_segments(10_000, seed=8))]
        fractions = [
            attempt_stats(c, segs)["applied"] / 10_000 for c in make_noise_ladder(segs, "swap", None, 8)
        ]
        assert all(a < b for a, b in zip(fractions, fractions[1:]))

    @pytest.mark.parametrize("noise_type,layout", [("swap", None), ("dupe", None), ("drop", None),
                                                   ("key", "qwerty"), ("key", "dubeolsik")])
    def test_replay(self, noise_type, layout, demo_lines):
        lines = demo_lines + ["한국어 문장을 입력합니다.", "오늘은 날씨가 좋다"]
        for k, line in enumerate(lines):
            text, records = noise_segment(Segment(k, line), NoiseSpec(noise_type, 0.7, k, layout))
            jamo = layout == "dubeolsik"
            assert replay_segment(line, records, jamo=jamo) == text

    def test_mix_degenerate_equals_single_type(self):
        seg = Segment(3, "the quick brown fox jumps")
        mixed = mix_segment(seg, MixSpec({"swap": 1.0}, 5))
        single = noise_segment(seg, NoiseSpec("swap", 1.0, 5))
        assert mixed == single

    def test_mix_zero_identity(self):
        seg = Segment(0, "nothing changes here")
        assert mix_segment(seg, MixSpec({}, 5)) == ("nothing changes here", [])


@settings(max_examples=60, deadline=None)
@given(
    text=st.text(st.characters(blacklist_categories=("Cs",), blacklist_characters="\n\r"), max_size=60),
    noise_type=st.sampled_from(["swap", "dupe", "drop", "key"]),
    p=st.floats(0, 1),
    seed=st.integers(0, 2**64 - 1),
)
def test_at_most_one_record_per_token_and_replay(text, noise_type, p, seed):
    spec = NoiseSpec(noise_type, p, seed, "qwerty" if noise_type == "key" else None)
    out, records = noise_segment(Segment(0, text), spec)
    idx = [r.token_index for r in records]
    assert len(idx) == len(set(idx))
    assert replay_segment(text, records) == out
    assert len(tokenize(out)) == len(tokenize(text))
