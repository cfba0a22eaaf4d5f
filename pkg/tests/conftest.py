import random
from pathlib import Path

import pytest

from typobench.pipeline import ExternalSystemSpec

FIXTURES = Path(__file__).parent / "fixtures"
ROOT = Path(__file__).resolve().parents[1]
DEMO_EN = ROOT / "src" / "typobench" / "data" / "demo" / "en.txt"


def mock(id, kind, mode, *extra, timeout=30.0, batch_size=8):
    return ExternalSystemSpec(
        id, kind, ("{python}", "-m", "typobench.mocks", mode, *extra), timeout=timeout, batch_size=batch_size
    )


_ALPHABET = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789.,!?'-éüçñ"


def fuzz_segments(n_tokens, seed=0, alphabet=_ALPHABET, max_len=9):
    """Random segments totalling ``n_tokens`` tokens; token lengths 1..max_len."""
    rng = random.Random(seed)
    segs = []
    left = n_tokens
    while left > 0:
        k = min(left, rng.randint(1, 25))
        toks = ["".join(rng.choice(alphabet) for _ in range(rng.randint(1, max_len))) for _ in range(k)]
        seps = [rng.choice([" ", " ", " ", "  ", "\t"]) for _ in range(k - 1)]
        text = toks[0] + "".join(s + t for s, t in zip(seps, toks[1:]))
        segs.append(text)
        left -= k
    return segs


@pytest.fixture
def demo_lines():
    return DEMO_EN.read_text("utf-8").splitlines()


ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number, ok, detail):
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
