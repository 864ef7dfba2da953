"""Worst-case limiting level over a family of outlier laws, as gamma shrinks.

    python scripts/robustness_curve.py scripts/configs/robustness.json --theory-only
"""

import argparse

from sympearson.laws import outlier_from_dict, parse_outlier
from sympearson.montecarlo import ExperimentSpec, load_config, robustness_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("config")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--theory-only", action="store_true")
    ap.add_argument("--curve-out", help="CSV of gamma against worst-case level")
    args = ap.parse_args()

    cfg = load_config(args.config)
    spec = ExperimentSpec.from_dict(cfg)
    pis = [parse_outlier(p) if isinstance(p, str) else outlier_from_dict(p) for p in cfg["pis"]]
    res = robustness_sweep(spec, cfg["gammas"], pis, workers=args.workers, empirical=not args.theory_only)

    emp = res.empirical_max_deviation
    print(f"{'gamma':>6} {'theory dev':>11}" + ("" if emp is None else f" {'empirical dev':>14}"))
    for i, g in enumerate(res.gammas):
        line = f"{g:6.2f} {res.theory_max_deviation[i]:11.5f}"
        if emp is not None:
            line += f" {emp[i]:14.4f}"
        print(line)
    if args.curve_out:
        with open(args.curve_out, "w") as fh:
            fh.write(res.curve_csv())


if __name__ == "__main__":
    main()
