#!/usr/bin/env python3
"""Sweep the tolerance on random instances and tabulate K, error bound and sup-norm growth.

Writes CSV to stdout:  seed, points, domain, c, eps, K, error_bound, max_restriction_err, max_abs_S
"""
import argparse
import csv
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from baire_extension import extend  # noqa: E402
from instances import random_instance  # noqa: E402


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", type=int, default=20)
    ap.add_argument("--halvings", type=int, default=12)
    ap.add_argument("--eps", type=float, default=1e-2)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--arithmetic", choices=["float", "rational"], default="float")
    args = ap.parse_args(argv)

    out = csv.writer(sys.stdout)
    out.writerow(["seed", "points", "domain", "c", "eps", "K", "error_bound", "max_restriction_err", "max_abs_S"])
    for i in range(args.instances):
        seed = args.seed + i
        space, A, f = random_instance(random.Random(seed))
        c = max(abs(v) for v in f.values.values())
        for j in range(args.halvings + 1):
            eps = args.eps / 2**j
            res = extend(space, A, f, eps, arithmetic=args.arithmetic)
            err = max(abs(float(f[a]) - float(res.extended[a])) for a in A)
            top = max(abs(float(v)) for v in res.extended.values())
            out.writerow([seed, space.size, len(A.members), float(c), eps, res.K, float(res.error_bound), err, top])
    return 0


if __name__ == "__main__":
    sys.exit(main())
