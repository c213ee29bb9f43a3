#!/usr/bin/env python3
"""Field-count scalability trend: build cost, lookup rate and memory
as the number of fields grows while the rule count stays fixed.

The packed-integer key representation keeps the per-probe cost flat,
so the lookup rate should degrade only mildly with d.

Usage:
    python3 scripts/field_scaling.py --rules 5000 --fields 2 5 15 50 100
"""

import argparse
import time

from tuplechain.classifier import TupleChainClassifier
from tuplechain.model import FieldSchema
from tuplechain.workload import TupleProfile, gen_rules, gen_trace


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rules", type=int, default=5000)
    ap.add_argument("--keys", type=int, default=5000)
    ap.add_argument("--fields", type=int, nargs="+",
                    default=[2, 5, 15, 50, 100])
    ap.add_argument("--field-width", type=int, default=8)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    print(f"{args.rules} rules per point, {args.keys} keys")
    print(f"{'d':>4}{'bits':>6}{'build s':>9}{'klookups/s':>12}"
          f"{'mem MB':>8}{'chains':>8}")
    for d in args.fields:
        schema = FieldSchema((args.field_width,) * d)
        bit_prob = min(0.35, 12 / schema.total_width)
        profile = TupleProfile(num_masks=24, num_chains=6,
                               mask_bit_prob=bit_prob)
        rs = gen_rules(args.seed, args.rules, schema, profile)
        keys = gen_trace(rs.rules, args.seed + 1, args.keys, 0.7, schema)
        t0 = time.monotonic()
        clf = TupleChainClassifier.build(schema, rs.rules)
        build = time.monotonic() - t0
        t0 = time.monotonic()
        for k in keys:
            clf.lookup(k)
        rate = len(keys) / (time.monotonic() - t0) / 1e3
        st = clf.stats()
        print(f"{d:>4}{schema.total_width:>6}{build:>9.2f}{rate:>12.1f}"
              f"{st.memory_bytes / 1e6:>8.2f}{st.chain_count:>8}")


if __name__ == "__main__":
    main()
