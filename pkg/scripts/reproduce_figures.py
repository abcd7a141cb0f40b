"""Run every scenario with its default settings and write CSV tables and SVG plots.

    python3 scripts/reproduce_figures.py [--out results] [--seed 0] [--skip decompose]
"""

import argparse
import pathlib
import time

from nhsense.config import SCENARIOS, ExperimentConfig
from nhsense.experiments import LOG_X, PLOTS, run
from nhsense.tables import emit_csv, emit_svg_plot


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--skip", nargs="*", default=[], choices=SCENARIOS)
    args = p.parse_args(argv)
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for scenario in SCENARIOS:
        if scenario in args.skip:
            continue
        start = time.perf_counter()
        table = run(ExperimentConfig(scenario=scenario, seed=args.seed))
        emit_csv(table, out / f"{scenario}.csv")
        x, ys = PLOTS[scenario]
        emit_svg_plot(table, x, ys, out / f"{scenario}.svg", logx=scenario in LOG_X, title=scenario)
        print(f"{scenario:20s} {len(table.rows):4d} rows  {time.perf_counter() - start:6.2f} s")


if __name__ == "__main__":
    main()
