"""Build tests/fixtures/metric_pairs.json.

Hypothesis/reference pairs are drawn from the demo corpus: noisy copies
at several levels, a few paraphrase-like edits, and unrelated or empty
hypotheses. Expected chrF and BLEU values come from sacrebleu, an
implementation independent of typobench.metrics, and are frozen into
the fixture.
"""

import json
import random
from pathlib import Path

import sacrebleu
from sacrebleu.metrics import BLEU, CHRF

from typobench.noise import noise_segment
from typobench.types import NoiseSpec, Segment

ROOT = Path(__file__).resolve().parents[1]


def build_pairs() -> list[tuple[str, str]]:
    refs = (ROOT / "src/typobench/data/demo/en.txt").read_text("utf-8").splitlines()
    rng = random.Random(7)
    pairs = []
    kinds = ["swap", "dupe", "drop", "key"]
    for k, ref in enumerate(refs):
        t = kinds[k % 4]
        p = (0.1, 0.3, 0.6, 1.0)[k % 4]
        noisy, _ = noise_segment(Segment(k, ref), NoiseSpec(t, p, 99, "qwerty" if t == "key" else None))
        pairs.append((noisy, ref))
    for k in range(12):
        ref = refs[k]
        words = ref.split()
        rng.shuffle(words)
        pairs.append((" ".join(words[: max(1, len(words) - k % 3)]), ref))
    pairs.append((refs[5], refs[6]))
    pairs.append(("", refs[7]))
    pairs.append((refs[8], refs[8]))
    pairs.append(("The the the the.", refs[9]))
    pairs.append(("A quiet street feels different after midnight!", refs[8]))
    pairs.append(("ok", "ok"))
    pairs.append(("Ça coûte trop cher, non ?", "Ça coûte vraiment trop cher, non ?"))
    pairs.append(("  spaced   out  text ", "spaced out text"))
    assert len(pairs) == 50, len(pairs)
    return pairs


def main() -> None:
    pairs = build_pairs()
    hyps = [h for h, _ in pairs]
    refs = [r for _, r in pairs]
    chrf = CHRF(char_order=6, word_order=0, beta=2, whitespace=False)
    bleu_ws = BLEU(tokenize="none", smooth_method="exp", effective_order=False)
    bleu_char = BLEU(tokenize="char", smooth_method="exp", effective_order=False)
    fixture = {
        "generator": f"sacrebleu {sacrebleu.__version__}",
        "pairs": [
            {
                "hyp": h,
                "ref": r,
                "chrf": chrf.corpus_score([h], [[r]]).score,
                "bleu": bleu_ws.corpus_score([h], [[r]]).score,
            }
            for h, r in pairs
        ],
        "corpus": {
            "chrf": chrf.corpus_score(hyps, [refs]).score,
            "bleu_whitespace": bleu_ws.corpus_score(hyps, [refs]).score,
            "bleu_char": bleu_char.corpus_score(hyps, [refs]).score,
        },
    }
    fixture["chrf_signature"] = str(chrf.get_signature())
    fixture["bleu_signature"] = str(bleu_ws.get_signature())
    out = ROOT / "tests/fixtures/metric_pairs.json"
    out.write_text(json.dumps(fixture, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
