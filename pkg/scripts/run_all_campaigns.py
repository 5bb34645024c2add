#!/usr/bin/env python3
"""Run every verification campaign on the default corpus and write reports.

Usage: python scripts/run_all_campaigns.py [--out-dir OUT] [--seed S]

Writes one JSON report file per (campaign, family kind) into OUT (default
./reports), prints a summary block per file, and exits nonzero if any
non-vacuous check fails.
"""

import argparse
import sys
import time
from pathlib import Path

from osb.campaigns import run_lemmas, run_verify_lp, run_verify_main
from osb.corpus import DEFAULT_SEED, default_corpus
from osb.families import FamilySpec
from osb.reports import all_passed, format_summary, reports_to_json, summarize

P_LIST = [1.0, 1.5, 2.0, 3.0]


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out-dir", default="reports")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    args = parser.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus = default_corpus(seed=args.seed)
    print(f"default corpus: {corpus.total_matrices()} matrices, seed {args.seed}")

    jobs = [
        ("verify-main-map", lambda: run_verify_main(corpus, FamilySpec("map"))),
        ("verify-main-sym", lambda: run_verify_main(corpus, FamilySpec("sym"))),
        ("verify-lp-map", lambda: run_verify_lp(corpus, FamilySpec("map"), P_LIST)),
        ("verify-lp-sym", lambda: run_verify_lp(corpus, FamilySpec("sym"), P_LIST)),
        ("lemmas-map", lambda: run_lemmas(corpus, FamilySpec("map"))),
        ("lemmas-sym", lambda: run_lemmas(corpus, FamilySpec("sym"))),
    ]
    ok = True
    for name, job in jobs:
        t0 = time.time()
        reports = job()
        path = out_dir / f"{name}.json"
        path.write_text(reports_to_json(reports))
        print(f"\n== {name} ({time.time() - t0:.1f}s) -> {path}")
        print(format_summary(summarize(reports)))
        ok = ok and all_passed(reports)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
