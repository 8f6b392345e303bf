"""
Command-line entry point.

    funcgauss run --scenario brownian-det-1 --runs 200 --seed 7 --format table
    funcgauss run --config experiment.toml --out report.csv --format csv
    funcgauss realdata --input cells.csv --transform log-offset:85 --trim 3min
    funcgauss simulate --model ou:beta=1,eta=0,sigma=1 --n 20 --seed 1
    funcgauss simulate --scenario ou-det-1 --n 50 --seed 1
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
from dotenv import load_dotenv

from core.config import (
    ExperimentConfig, RealDataConfig, env_log_level, load_experiment_config,
    parse_model_spec, parse_transform
)
from core.errors import ConfigError, FuncGaussError
from core.experiment import run_experiment, run_real_data
from core.grid import Grid, LabeledSample
from core.ingest import write_curve_csv
from core.scenarios import REAL_DATA_ROSTER, get_scenario, list_scenarios
from core.simulate import make_rng, sample_labeled
from utils.durations import parse_trim
from utils.io import emit_report, report_to_xlsx


logger = logging.getLogger('funcgauss')


def _write_output(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding='utf-8')
        logger.info("Wrote %s", out)
    else:
        sys.stdout.write(text)


def _finish_report(report, args) -> None:
    _write_output(emit_report(report, args.format), args.out)
    if args.xlsx:
        Path(args.xlsx).write_bytes(report_to_xlsx(report))
        logger.info("Wrote %s", args.xlsx)


def cmd_run(args) -> int:
    if args.config:
        cfg = load_experiment_config(args.config)
    elif args.scenario:
        cfg = ExperimentConfig.from_scenario(args.scenario)
    else:
        raise ConfigError("run needs --config or --scenario")

    cfg = cfg.with_overrides(runs=args.runs, seed=args.seed)
    report = run_experiment(cfg, max_workers=args.workers)
    _finish_report(report, args)
    return 0


def cmd_realdata(args) -> int:
    transform, offset = parse_transform(args.transform)
    roster = tuple(r.strip() for r in args.roster.split(',')) if args.roster else REAL_DATA_ROSTER

    cfg = RealDataConfig(
        input_path=args.input,
        label_column=args.label_column,
        transform=transform,
        offset=offset,
        trim=parse_trim(args.trim, args.sampling_interval),
        roster=roster,
    )
    report = run_real_data(cfg, max_workers=args.workers)
    _finish_report(report, args)
    return 0


def cmd_simulate(args) -> int:
    grid = Grid.uniform(args.n_intervals)

    if args.scenario:
        scenario = get_scenario(args.scenario)
        sample = sample_labeled(scenario.model0, scenario.model1, args.n, args.n, None, grid, args.seed)
    elif args.model:
        model = parse_model_spec(args.model)
        values = model.sample_paths(grid, args.n, make_rng(args.seed))
        sample = LabeledSample(grid, values, np.zeros(args.n, dtype=int))
    else:
        raise ConfigError("simulate needs --model or --scenario")

    _write_output(write_curve_csv(sample), args.out)
    return 0


def cmd_scenarios(args) -> int:
    for scenario_id in list_scenarios():
        print(f"{scenario_id:18s} {get_scenario(scenario_id).title}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='funcgauss',
        description='Plug-in, Bayes and k-NN classification of Gaussian curves'
    )
    sub = parser.add_subparsers(dest='command', required=True)

    run = sub.add_parser('run', help='Monte Carlo experiment')
    run.add_argument('--config', help='Experiment TOML file')
    run.add_argument('--scenario', help='Registered scenario id')
    run.add_argument('--runs', type=int)
    run.add_argument('--seed', type=int)
    run.set_defaults(func=cmd_run)

    real = sub.add_parser('realdata', help='Leave-one-out evaluation of a curve CSV')
    real.add_argument('--input', required=True)
    real.add_argument('--label-column', default='label')
    real.add_argument('--transform', default='identity', help="identity or log-offset:<offset>")
    real.add_argument('--trim', default='0', help="Sample count or duration such as 3min")
    real.add_argument('--sampling-interval', type=float, default=10.0, help='Seconds between samples')
    real.add_argument('--roster', help='Comma-separated classifier names')
    real.set_defaults(func=cmd_realdata)

    for command in (run, real):
        command.add_argument('--out', help='Output path (default stdout)')
        command.add_argument('--format', choices=('table', 'csv'), default='table')
        command.add_argument('--xlsx', help='Also write an XLSX workbook')
        command.add_argument('--workers', type=int)

    simulate = sub.add_parser('simulate', help='Dump simulated curves as CSV')
    simulate.add_argument('--model', help="e.g. 'brownian:c=1.5,sigma=1' or 'ou:beta=1,eta=0,sigma=1,start=random'")
    simulate.add_argument('--scenario', help='Dump both classes of a registered scenario')
    simulate.add_argument('--n', type=int, default=10, help='Curves (per class with --scenario)')
    simulate.add_argument('--seed', type=int, default=0)
    simulate.add_argument('--n-intervals', type=int, default=50)
    simulate.add_argument('--out')
    simulate.set_defaults(func=cmd_simulate)

    scenarios = sub.add_parser('scenarios', help='List registered scenarios')
    scenarios.set_defaults(func=cmd_scenarios)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    logging.basicConfig(
        level=env_log_level(),
        format='%(asctime)s %(levelname)s %(name)s: %(message)s'
    )

    args = build_parser().parse_args(argv)

    try:
        return args.func(args)
    except FuncGaussError as e:
        logger.error("%s", e)
        return 2


if __name__ == '__main__':
    sys.exit(main())
