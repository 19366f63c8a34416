#!/usr/bin/env python3
"""Print the identity-suite residual table and exit nonzero on any failure."""

import argparse
import sys

from specden.selfcheck import format_table, run_checks


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tol", type=float, default=1e-9)
    args = ap.parse_args()
    results = run_checks(seed=args.seed)
    print(format_table(results, args.tol))
    return 0 if all(r.passed(args.tol) for r in results) else 3


if __name__ == "__main__":
    sys.exit(main())
