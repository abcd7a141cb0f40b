"""``nh-sense <scenario> [--config FILE] [--seed S] [--out CSV] [--svg SVG] [--logx] [--section.key VALUE ...]``"""

from __future__ import annotations

import argparse
import logging
import sys

import yaml

from .config import SCENARIOS, ExperimentConfig, apply_overrides
from .experiments import LOG_X, PLOTS, run
from .tables import emit_csv, emit_svg_plot, render_csv


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nh-sense", description="Run a non-Hermitian sensing experiment and write a CSV table.")
    p.add_argument("scenario", choices=SCENARIOS)
    p.add_argument("--config", help="YAML experiment file")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--svg", help="also draw the table as an SVG line plot")
    p.add_argument("--logx", action="store_true", help="log-scale x axis in the plot")
    p.add_argument("--verbose", action="store_true")
    return p


def _parse_overrides(extra: list[str]) -> dict[str, str]:
    out = {}
    it = iter(extra)
    for token in it:
        if not token.startswith("--") or "." not in token:
            raise UsageError(f"unrecognized argument {token!r}; overrides look like --section.key value")
        key, eq, value = token[2:].partition("=")
        if not eq:
            value = next(it, None)
            if value is None:
                raise UsageError(f"missing value for --{key}")
        out[key] = value
    return out


def load(args, extra) -> ExperimentConfig:
    data = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
        if not isinstance(data, dict):
            raise ValueError("config file must hold a mapping")
    if data.get("scenario", args.scenario) != args.scenario:
        raise ValueError(f"config scenario {data['scenario']!r} does not match {args.scenario!r}")
    data["scenario"] = args.scenario
    if args.seed is not None:
        data["seed"] = args.seed
    apply_overrides(data, _parse_overrides(extra))
    cfg = ExperimentConfig.from_dict(data)
    if args.out:
        cfg.output.out = args.out
    if args.svg:
        cfg.output.svg = args.svg
    cfg.output.logx = cfg.output.logx or args.logx
    return cfg


def main(argv=None) -> int:
    try:
        args, extra = build_parser().parse_known_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
        cfg = load(args, extra)
        table = run(cfg)
        if cfg.output.svg:
            x, ys = PLOTS[cfg.scenario]
            emit_svg_plot(table, x, ys, cfg.output.svg, logx=cfg.output.logx or cfg.scenario in LOG_X, title=cfg.scenario)
        if cfg.output.out:
            emit_csv(table, cfg.output.out)
        else:
            sys.stdout.write(render_csv(table))
            sys.stdout.flush()
    except UsageError as exc:
        print(f"error: UsageError: {exc}".replace("\n", " "), file=sys.stderr)
        return 2
    except Exception as exc:  # one machine-readable line, nonzero exit
        print(f"error: {type(exc).__name__}: {exc}".replace("\n", " "), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
