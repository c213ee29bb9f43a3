#!/usr/bin/env python3
"""Compare average probe counts and lookup rates across algorithms.

Generates one synthetic workload and runs every classifier over the
same trace, printing a small table.  The interesting column is avg
probes: chained lookup should sit well below one-probe-per-tuple TSS.

Usage:
    python3 scripts/probe_comparison.py --rules 20000 --masks 48 --chains 8
"""

import argparse
import time

from tuplechain.bench import ALGOS, make_classifier
from tuplechain.model import FieldSchema
from tuplechain.workload import TupleProfile, gen_rules, gen_trace


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rules", type=int, default=20000)
    ap.add_argument("--keys", type=int, default=20000)
    ap.add_argument("--masks", type=int, default=48)
    ap.add_argument("--chains", type=int, default=8)
    ap.add_argument("--hit-ratio", type=float, default=0.7)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--widths", type=int, nargs="+", default=[16, 16])
    args = ap.parse_args()

    schema = FieldSchema(tuple(args.widths))
    profile = TupleProfile(num_masks=args.masks, num_chains=args.chains)
    rs = gen_rules(args.seed, args.rules, schema, profile)
    keys = gen_trace(rs.rules, args.seed + 1, args.keys,
                     args.hit_ratio, schema)
    masks = len({r.mask for r in rs.rules})
    print(f"{len(rs.rules)} rules over {masks} masks, "
          f"{len(keys)} keys, hit ratio {args.hit_ratio}")
    print(f"{'algo':<8}{'build s':>9}{'avg probes':>12}"
          f"{'max':>6}{'klookups/s':>12}")
    for algo in ALGOS:
        t0 = time.monotonic()
        clf = make_classifier(algo, rs)
        build = time.monotonic() - t0
        total = peak = 0
        t0 = time.monotonic()
        for k in keys:
            p = clf.lookup(k).probes
            total += p
            peak = max(peak, p)
        rate = len(keys) / (time.monotonic() - t0) / 1e3
        print(f"{algo:<8}{build:>9.2f}{total / len(keys):>12.2f}"
              f"{peak:>6}{rate:>12.1f}")


if __name__ == "__main__":
    main()
