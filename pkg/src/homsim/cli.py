"""Command-line front end.

Subcommands::

    homsim run --scenario superposition --trials 100000 --seed 42
    homsim sweep --param gamma --from 0 --to 1 --steps 21
    homsim oracle-check --samples 1000 --seed 7

Exit codes: 0 success, 1 failed check, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, fields
from typing import List, Optional

import numpy as np

from homsim import experiment_runner
from homsim.errors import HomsimError
from homsim.experiment_runner import ScenarioConfig, ScenarioResult
from homsim.measurement_chain import CollapseModel

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

ORACLE_TOL = 1e-12
SEED_ENV = "HOMSIM_SEED"

SCENARIOS = {
    "superposition": "UnitaryErased, eta=1 (records coherently erased)",
    "recorded": "UnitaryRecorded, eta=1 (detector record kept)",
    "collapse": "ProjectiveCollapse, eta=1",
    "dephasing": "Dephasing(gamma), eta=1; requires --gamma",
    "distinguishable": "UnitaryErased, eta=0 (photons distinguishable in time)",
}


@dataclass(frozen=True)
class OutputRecord:
    scenario: str
    model: str
    gamma: Optional[float]
    eta: float
    trials: int
    coincidences: int
    rate: float
    ci_low: float
    ci_high: float
    analytic: float
    seed: int

    @classmethod
    def from_result(cls, scenario: str, result: ScenarioResult) -> "OutputRecord":
        cfg = result.config
        return cls(
            scenario=scenario,
            model=cfg.model.name,
            gamma=cfg.model.gamma,
            eta=cfg.eta,
            trials=result.tally.trials,
            coincidences=result.tally.coincidences,
            rate=result.tally.coincidences / result.tally.trials,
            ci_low=result.interval[0],
            ci_high=result.interval[1],
            analytic=result.analytic_rate,
            seed=cfg.seed,
        )


FIELDNAMES = [f.name for f in fields(OutputRecord)]
_FLOAT_FIELDS = {"gamma", "eta", "rate", "ci_low", "ci_high", "analytic"}
_INT_FIELDS = {"trials", "coincidences", "seed"}


def _csv_value(name, value):
    if value is None:
        return ""
    if name in _FLOAT_FIELDS:
        return f"{value:.17g}"
    return str(value)


def write_csv(records: List[OutputRecord], stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(FIELDNAMES)
    for rec in records:
        writer.writerow([_csv_value(k, v) for k, v in asdict(rec).items()])


def write_jsonl(records: List[OutputRecord], stream) -> None:
    for rec in records:
        stream.write(json.dumps(asdict(rec)) + "\n")


def read_csv(stream) -> List[OutputRecord]:
    """Parse records written by :func:`write_csv`."""
    out = []
    for row in csv.DictReader(stream):
        values = {}
        for name in FIELDNAMES:
            raw = row[name]
            if name in _FLOAT_FIELDS:
                values[name] = None if raw == "" else float(raw)
            elif name in _INT_FIELDS:
                values[name] = int(raw)
            else:
                values[name] = raw
        out.append(OutputRecord(**values))
    return out


class UsageError(Exception):
    pass


def _unit_interval(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"{value} is outside [0, 1]")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"{value} must be at least 1")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("seed must be nonnegative")
    return value


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return _seed(raw)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"{SEED_ENV}: {exc}") from None


def _scenario_help() -> str:
    return "; ".join(f"{name}: {desc}" for name, desc in SCENARIOS.items())


def build_parser(default_seed: int = 0) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="homsim",
        description="Two-photon interference test of superposition versus collapse "
                    "in a measuring apparatus.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, scenario_default):
        p.add_argument("--scenario", choices=list(SCENARIOS), default=scenario_default,
                       help=_scenario_help())
        p.add_argument("--gamma", type=_unit_interval, default=None,
                       help="dephasing strength in [0, 1] (dephasing scenario only)")
        p.add_argument("--eta", type=_unit_interval, default=None,
                       help="temporal overlap in [0, 1]; default 1 (0 for distinguishable)")
        p.add_argument("--trials", type=_positive_int, default=100_000)
        p.add_argument("--seed", type=_seed, default=default_seed,
                       help=f"master seed (default from ${SEED_ENV}, else 0)")
        p.add_argument("--out", default="-", help="output file, '-' for standard output")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    run = sub.add_parser("run", help="run one scenario")
    add_common(run, None)

    sweep = sub.add_parser("sweep", help="sweep gamma or eta over a uniform grid")
    add_common(sweep, None)
    sweep.add_argument("--param", choices=experiment_runner.SWEEP_PARAMS, required=True)
    sweep.add_argument("--from", dest="start", type=_unit_interval, required=True)
    sweep.add_argument("--to", dest="stop", type=_unit_interval, required=True)
    sweep.add_argument("--steps", type=int, required=True)

    oracle = sub.add_parser("oracle-check",
                            help="compare closed-form coincidence rate with Fock-space expansion")
    oracle.add_argument("--samples", type=_positive_int, default=1000)
    oracle.add_argument("--seed", type=_seed, default=default_seed)
    return parser


def _scenario_config(args, scenario: str) -> ScenarioConfig:
    if scenario == "dephasing":
        if args.gamma is None:
            raise UsageError("the dephasing scenario requires --gamma")
        model = CollapseModel.dephasing(args.gamma)
    else:
        if args.gamma is not None:
            raise UsageError(f"--gamma only applies to the dephasing scenario, not {scenario}")
        model = {
            "superposition": CollapseModel.unitary_erased,
            "distinguishable": CollapseModel.unitary_erased,
            "recorded": CollapseModel.unitary_recorded,
            "collapse": CollapseModel.projective_collapse,
        }[scenario]()
    if scenario == "distinguishable":
        if args.eta not in (None, 0.0):
            raise UsageError("the distinguishable scenario fixes eta = 0")
        eta = 0.0
    else:
        eta = 1.0 if args.eta is None else args.eta
    return ScenarioConfig(model=model, eta=eta, trials=args.trials, seed=args.seed,
                          label=scenario)


def cmd_run(args) -> List[OutputRecord]:
    if args.scenario is None:
        raise UsageError("run requires --scenario")
    config = _scenario_config(args, args.scenario)
    result = experiment_runner.run_scenario(config)
    return [OutputRecord.from_result(args.scenario, result)]


def sweep_grid(start: float, stop: float, steps: int) -> List[float]:
    if steps < 2:
        raise UsageError("--steps must be at least 2")
    if stop < start:
        raise UsageError("--to must not be below --from")
    grid = np.linspace(start, stop, steps)
    grid[0], grid[-1] = start, stop
    return [float(v) for v in grid]


def cmd_sweep(args) -> List[OutputRecord]:
    values = sweep_grid(args.start, args.stop, args.steps)
    if args.param == "gamma":
        scenario = args.scenario or "dephasing"
        if scenario != "dephasing":
            raise UsageError("a gamma sweep runs the dephasing scenario only")
        if args.gamma is not None:
            raise UsageError("--gamma conflicts with --param gamma")
        base_model = CollapseModel.dephasing(values[0])
        eta = 1.0 if args.eta is None else args.eta
        base = ScenarioConfig(model=base_model, eta=eta, trials=args.trials,
                              seed=args.seed, label=scenario)
    else:
        scenario = args.scenario or "superposition"
        if scenario == "distinguishable":
            raise UsageError("the distinguishable scenario fixes eta; sweep superposition instead")
        if args.eta is not None:
            raise UsageError("--eta conflicts with --param eta")
        base = _scenario_config(args, scenario)
    results = experiment_runner.run_sweep(base, args.param, values)
    return [OutputRecord.from_result(scenario, r) for r in results]


def cmd_oracle_check(args, out) -> int:
    error = experiment_runner.oracle_check(args.samples, args.seed)
    ok = error <= ORACLE_TOL
    out.write(f"max_abs_error={error:.3e} tolerance={ORACLE_TOL:.0e} "
              f"{'PASS' if ok else 'FAIL'}\n")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _emit(records, args, stdout) -> None:
    buf = io.StringIO()
    (write_jsonl if args.format == "json" else write_csv)(records, buf)
    if args.out == "-":
        stdout.write(buf.getvalue())
    else:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            fh.write(buf.getvalue())


def main(argv: Optional[List[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        parser = build_parser(_default_seed())
    except UsageError as exc:
        stderr.write(f"homsim: error: {exc}\n")
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        if args.command == "oracle-check":
            return cmd_oracle_check(args, stdout)
        records = cmd_run(args) if args.command == "run" else cmd_sweep(args)
        _emit(records, args, stdout)
    except (UsageError, HomsimError, OSError) as exc:
        stderr.write(f"homsim {args.command}: error: {exc}\n")
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
