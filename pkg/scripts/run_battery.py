#!/usr/bin/env python3
"""Run the randomized equivalence battery and print a summary.

Example:
    python scripts/run_battery.py --instances 1000 --max-dim 8 --seed 42 \
        --out battery_report.json
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from stabgi.oracle import REGIMES, battery
from stabgi.reports import battery_report_to_json


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--instances", type=int, default=1000)
    parser.add_argument("--max-dim", type=int, default=8)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--regime", choices=REGIMES, default=None)
    parser.add_argument("--out", default=None)
    args = parser.parse_args(argv)

    regimes = (args.regime,) if args.regime else None
    start = time.perf_counter()
    report = battery(args.instances, args.max_dim, args.seed, regimes=regimes)
    elapsed = time.perf_counter() - start

    print(
        f"instances: {report.instances_run}  kept: {report.instances_kept}  "
        f"excluded: {report.instances_excluded}  ({elapsed:.2f}s)"
    )
    print(
        f"three-way agreement: {report.threeway_agreement_count}/{report.instances_kept}  "
        f"five-way agreement: {report.fiveway_agreement_count}/{report.fiveway_applicable}"
    )
    print(
        f"stable: {report.stable_count}  worst construction residual: "
        f"{report.gi_residual_max:.3e}  worst subspace distance: "
        f"{report.subspace_distance_max:.3e}  min c (nonzero): {report.min_c_nonzero:.12f}"
    )
    if report.failures:
        print(f"FAILURES: {len(report.failures)}")
        for failure in report.failures[:20]:
            print(f"  seed={failure.seed} condition={failure.condition}")
    else:
        print("no failures")

    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(battery_report_to_json(report), fh, indent=2)
        print(f"report written to {args.out}")
    return 3 if report.failures else 0


if __name__ == "__main__":
    sys.exit(main())
