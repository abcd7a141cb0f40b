"""Compare the propagated standard deviation of S' with Monte Carlo as the noise grows.

The propagation formula is first order in eta; this script shows how its
error grows with eta at a fixed population and photon budget.

    python3 scripts/noise_floor_study.py [--s 0.34] [--n 10000] [--p 1.0] [--reps 10000] [--out table.csv]
"""

import argparse

import numpy as np

from nhsense.noise import NoiseModel, estimate, std_s_prime
from nhsense.tables import ResultTable, emit_csv, render_csv


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--s", type=float, default=0.34)
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--ratio", type=float, default=1.2, help="eta_v / eta_h")
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    args = p.parse_args(argv)
    rows = []
    for k, eta_h in enumerate(np.linspace(0, 0.2, 11)):
        model = NoiseModel.with_ratio(eta_h, args.ratio, photon_budget_n=args.n, success_probability_p=args.p)
        formula = std_s_prime(args.s, model)
        mc = estimate(args.s, 1.0, model, args.reps, args.seed, sweep_index=k)
        rows.append([eta_h, model.eta_v, formula, mc.std_s_prime, mc.std_s_prime / formula - 1, mc.mean_s_prime])
    table = ResultTable(["eta_h", "eta_v", "std_formula", "std_mc", "relative_error", "mean_mc"], rows, vars(args))
    if args.out:
        emit_csv(table, args.out)
    else:
        print(render_csv(table), end="")


if __name__ == "__main__":
    main()
