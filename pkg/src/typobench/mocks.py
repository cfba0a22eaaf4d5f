"""Stand-in external systems speaking the line protocol.

Run as ``python -m typobench.mocks <mode> [options]``. Used by the test
suite and the demo experiment in place of neural models.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from .metrics.chrf import sentence_chrf


def _edit_distance(a: str, b: str) -> int:
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def _respond(args, k: int, req: dict) -> str | None:
    mode = args.mode
    if mode in ("echo", "identity"):
        return req["src"]
    if mode == "upper":
        return req["src"].upper()
    if mode == "oracle":
        return args.clean_lines[k]
    if mode == "const":
        return repr(args.value)
    if mode == "chrf":
        ref = req.get("ref", req["src"])
        return repr(sentence_chrf(req["mt"], ref) / 100.0)
    if mode == "neg-edit":
        ref = req.get("ref", req["src"])
        return repr(-float(_edit_distance(req["mt"], ref)))
    if mode == "skip":
        return None if k == args.offset else req["src"]
    if mode == "garbage":
        return "not-a-number"
    raise SystemExit(f"unknown mode {mode}")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="python -m typobench.mocks", description=__doc__)
    ap.add_argument(
        "mode",
        choices=["echo", "identity", "upper", "oracle", "const", "chrf", "neg-edit", "skip", "garbage", "fail", "hang"],
    )
    ap.add_argument("--value", type=float, default=0.5, help="score returned by 'const'")
    ap.add_argument("--clean", help="file of clean lines returned in order by 'oracle'")
    ap.add_argument("--offset", type=int, default=0, help="request offset left unanswered by 'skip'")
    ap.add_argument("--log", help="append one line per invocation to this file")
    ap.add_argument("--capture", help="append every request, as received, to this file")
    args = ap.parse_args(argv)

    if args.log:
        with open(args.log, "a", encoding="utf-8") as f:
            f.write(args.mode + "\n")
    if args.mode == "fail":
        sys.stdin.read()
        print("mock failure", file=sys.stderr)
        return 3
    if args.mode == "hang":
        time.sleep(3600)
        return 0
    if args.mode == "oracle":
        with open(args.clean, encoding="utf-8") as f:
            args.clean_lines = f.read().split("\n")

    capture = open(args.capture, "a", encoding="utf-8") if args.capture else None
    for k, line in enumerate(sys.stdin):
        req = json.loads(line)
        if capture is not None:
            capture.write(line)
            capture.flush()
        out = _respond(args, k, req)
        if out is not None:
            sys.stdout.write(out + "\n")
            sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
