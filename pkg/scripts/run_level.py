"""Empirical level of the test against its limiting value.

    python scripts/run_level.py scripts/configs/null_level.json --workers 4
"""

import argparse
import time

from sympearson.montecarlo import ExperimentSpec, run_level_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("config")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--reps", type=int)
    ap.add_argument("--out", help="JSON result path")
    args = ap.parse_args()

    spec = ExperimentSpec.from_file(args.config)
    if args.reps:
        spec = ExperimentSpec.from_dict({**spec.to_dict(), "replications": args.reps})
    t0 = time.perf_counter()
    res = run_level_experiment(spec, workers=args.workers)
    dt = time.perf_counter() - t0

    print(f"replications   {spec.replications} ({res.failures} failed) in {dt:.1f}s")
    print(f"rejection rate {res.rejection_rate:.4f} +/- {res.rejection_se:.4f}")
    if res.theory_level is not None:
        print(f"theory level   {res.theory_level:.4f}  (lambda2 = {res.lambda2:.4f})")
    print(f"KS distance    {res.ks_distance_to_reference:.4f}")
    if res.unreliable:
        print("warning: more than 1% of replications failed")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(res.to_json(indent=2) + "\n")


if __name__ == "__main__":
    main()
