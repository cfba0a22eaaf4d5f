"""Run the demo experiment and print the robustness report.

    python scripts/demo_experiment.py [--output DIR] [--jobs N]
"""

import argparse
import dataclasses
from pathlib import Path

from typobench.pipeline import load_config, run_experiment

HERE = Path(__file__).resolve().parent


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--output", help="output directory (default: ./runs)")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    cfg = load_config(HERE / "demo_manifest.yaml")
    if args.output:
        cfg = dataclasses.replace(cfg, output=args.output)
    result = run_experiment(cfg, jobs=args.jobs)
    print((result.root / "report" / "report.csv").read_text())
    for name, rows in sorted(result.breakdowns.items()):
        worst = max(rows, key=lambda b: b.p)
        print(f"{name}: at p={worst.p:.1f} improved={worst.improved:.3f} harmed={worst.harmed:.3f}")


if __name__ == "__main__":
    main()
