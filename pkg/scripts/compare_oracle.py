#!/usr/bin/env python3
"""Compare engine and exact oracle on random instances; report mismatches and timing."""
import argparse
import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from baire_extension import extend, extend_positive  # noqa: E402
from baire_extension.verification import oracle_trace  # noqa: E402
from instances import random_instance  # noqa: E402


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-n", "--instances", type=int, default=500)
    ap.add_argument("--depth", type=int, default=12)
    ap.add_argument("--mode", choices=["signed", "positive"], default="signed")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = random.Random(args.seed)
    run = extend_positive if args.mode == "positive" else extend
    bad = 0
    t0 = time.perf_counter()
    for i in range(args.instances):
        space, A, f = random_instance(rng, nonnegative=args.mode == "positive")
        res = run(space, A, f, arithmetic="rational", depth=args.depth)
        trace = oracle_trace(space, A, f, args.depth, args.mode)
        if res.extended != trace.extended or tuple(t.H.members.members for t in res.terms) != trace.sets:
            bad += 1
            print(f"mismatch on instance {i}", file=sys.stderr)
    print(f"{args.instances} instances, {bad} mismatches, {time.perf_counter() - t0:.2f}s")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
