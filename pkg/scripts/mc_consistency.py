#!/usr/bin/env python3
"""Monte Carlo calibration experiment: how often does the seeded estimator
land within 4 standard errors of the exact enumerated value?

Usage: python scripts/mc_consistency.py [--runs 1000] [--samples 100000]

Prints one row per corpus case.  Cuts of the default acceptance setting
(1000 runs at 1e5 draws over 20 cases) take a few minutes; use smaller
--runs for a quick look.
"""

import argparse
import sys
import time

from osb.corpus import default_corpus
from osb.families import full_mapping_family, symmetric_group
from osb.orderstats import expected_top_sum, expected_top_sum_mc

CASE_SHAPES = [
    (2, 2, "sym"), (3, 3, "sym"), (4, 4, "sym"), (5, 5, "sym"),
    (2, 2, "map"), (3, 3, "map"), (2, 3, "map"), (3, 2, "map"),
    (4, 5, "map"), (5, 4, "map"),
]


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--runs", type=int, default=1000)
    parser.add_argument("--samples", type=int, default=100_000)
    args = parser.parse_args()

    corpus = default_corpus()
    cells = {(c.n, c.N): dict(c.matrices) for c in corpus}
    print(f"{'case':>16} {'exact':>10} {'mean |z|':>9} {'max |z|':>8} "
          f"{'within 4se':>11}")
    all_ok = True
    t0 = time.time()
    for n, N, kind in CASE_SHAPES:
        family = symmetric_group(n) if kind == "sym" else full_mapping_family(n, N)
        for mid in ("u00", "u01"):
            a = cells[(n, N)][mid]
            ell = (n + 1) // 2
            exact = expected_top_sum(a, family, ell).value
            hits = 0
            zs = []
            for seed in range(args.runs):
                r = expected_top_sum_mc(a, family, ell, args.samples, seed)
                z = abs(r.value - exact) / r.stderr if r.stderr else 0.0
                zs.append(z)
                if abs(r.value - exact) <= 4.0 * r.stderr:
                    hits += 1
            frac = hits / args.runs
            all_ok = all_ok and frac >= 0.99
            label = f"{n}x{N}/{kind}/{mid}"
            print(f"{label:>16} {exact:>10.6f} {sum(zs)/len(zs):>9.3f} "
                  f"{max(zs):>8.3f} {hits:>6}/{args.runs}")
    print(f"total {time.time() - t0:.0f}s; "
          f"{'all cases >= 99%' if all_ok else 'SOME CASE BELOW 99%'}")
    return 0 if all_ok else 1


if __name__ == "__main__":
    sys.exit(main())
