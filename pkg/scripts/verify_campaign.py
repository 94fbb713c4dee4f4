"""Run every verification suite at acceptance size and write JSON reports.

    python3 scripts/verify_campaign.py --seed 7 --out-dir reports
"""

import argparse
import json
import os
import sys
import time

from mmi.harness import run_suite

COUNTS = {"mt1": 1000, "mt2": 500, "section6": 300, "metrics-inequalities": 200, "sandwich": 200, "lsc": 50}


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--scale", type=float, default=1.0, help="multiply every instance count")
    ap.add_argument("--out-dir", default="reports")
    args = ap.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)
    bad = 0
    for name, count in COUNTS.items():
        n = max(1, int(count * args.scale))
        t = time.perf_counter()
        rep = run_suite(name, n, args.seed)
        with open(os.path.join(args.out_dir, f"{name}.json"), "w") as fh:
            json.dump(rep.to_dict(), fh, indent=2, sort_keys=True, default=str)
        print(f"{name:22s} {n:5d} instances {rep.checks:5d} checks {len(rep.failures):3d} failures "
              f"{time.perf_counter() - t:6.1f}s")
        bad += len(rep.failures)
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
