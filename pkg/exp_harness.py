#!/usr/bin/env python3
"""
exp_harness.py - Scenario configs, reproducible experiment runs and the CLI

A scenario file is INI-style:

    [system]  M, J1, J2 (default 0), channel_file (fixed gains instead of sampling,
              relative to the scenario file)
    [scheme]  N (default 1), epsilon (default 0.05), KL (default ML - Lp),
              u and alpha (comma lists pinning the dithers; given together)
    [run]     mode, P_dB (default 20,30,40), trials (default 10000), seed (default 0),
              channel_dist (standard-normal | uniform(lo,hi)), simulate_pe (default false)
    [sweep]   M, J1, N as comma lists or a..b ranges (dof and feasibility modes)

Unless pinned, channels draw from seed_substream(seed, "channel"), dithers from
seed_substream(seed, "dithers") and SER trials from per-block substreams,
so every table is a pure function of the scenario.
"""

import argparse
import configparser
import json
import logging
import sys
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from itertools import product
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from baseline_nullspace import baseline_report, compare_feasibility, nullspace_plan
from channel_model import ChannelDistribution, ChannelSet, SystemDims, load_channel_set, sample_channels
from config import TOOLKIT_VERSION, config
from errors import EXIT_OK, CapExceededError, ConfigError, InfeasibleInstanceError, ToolkitError
from modem import LinkInstance, build_link_instance, choose_KL, run_ser_trials
from monomial_precoder import (alignment_stats, build_basis, build_selection, cardinalities,
                               export_exponents_text, export_selection_text)
from plot_results import PLOTTERS
from results_io import write_run_record, write_table
from secrecy_analysis import (dof_formula, dof_limit, leakage_curve, leakage_table, printed_K,
                              rate_table)
from seed_streams import MAX_SEED, compute_file_hash, scenario_digest, seed_substream

__all__ = ["Scenario", "RunRecord", "parse_config", "build_instance", "run", "main", "seed_substream"]

logger = logging.getLogger("exp_harness")

# section -> {key in file: Scenario field}
CONFIG_KEYS: Dict[str, Dict[str, str]] = {
    "system": {"M": "M", "J1": "J1", "J2": "J2", "channel_file": "channel_file"},
    "scheme": {"N": "N", "epsilon": "epsilon", "KL": "KL", "u": "u", "alpha": "alpha"},
    "run": {"mode": "mode", "P_dB": "P_dB", "trials": "trials", "seed": "seed",
            "channel_dist": "channel_dist", "simulate_pe": "simulate_pe"},
    "sweep": {"M": "sweep_M", "J1": "sweep_J1", "N": "sweep_N"},
}
REQUIRED_KEYS = (("system", "M"), ("system", "J1"), ("run", "mode"))


class JsonFormatter(logging.Formatter):
    def format(self, record):
        payload = {
            "timestamp": datetime.now(timezone.utc).isoformat().replace("+00:00", "Z"),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        if hasattr(record, "extra") and isinstance(record.extra, dict):
            payload.update(record.extra)
        return json.dumps(payload)


def setup_logging(level: Optional[str] = None) -> None:
    """One JSON object per line on stderr for the whole toolkit"""
    root = logging.getLogger()
    root.setLevel((level or config.log_level).upper())
    for existing in list(root.handlers):
        if isinstance(existing.formatter, JsonFormatter):
            root.removeHandler(existing)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(JsonFormatter())
    root.addHandler(handler)


class Scenario(BaseModel):
    """A validated experiment description"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    mode: Literal["build", "ser", "leakage", "rate", "dof", "feasibility", "baseline"]
    M: int = Field(ge=1)
    J1: int = Field(ge=1)
    J2: int = Field(default=0, ge=0)
    N: int = Field(default=1, ge=1)
    epsilon: float = Field(default=0.05, gt=0.0, lt=1.0)
    KL: Optional[int] = Field(default=None, ge=1)
    P_dB: Tuple[float, ...] = (20.0, 30.0, 40.0)
    trials: int = Field(default=10_000, ge=1)
    seed: int = Field(default=0, ge=0, le=MAX_SEED)
    channel_dist: str = "standard-normal"
    channel_file: Optional[str] = None
    u: Optional[Tuple[float, ...]] = None
    alpha: Optional[Tuple[float, ...]] = None
    simulate_pe: bool = False
    sweep_M: Tuple[int, ...] = ()
    sweep_J1: Tuple[int, ...] = ()
    sweep_N: Tuple[int, ...] = ()

    @field_validator("P_dB")
    @classmethod
    def _increasing_grid(cls, grid: Tuple[float, ...]) -> Tuple[float, ...]:
        if not grid:
            raise ValueError("P_dB grid is empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError(f"P_dB must be strictly increasing, got {list(grid)}")
        if grid[0] <= 0:
            raise ValueError("P_dB values must be positive (P > 1)")
        return grid

    @field_validator("channel_dist")
    @classmethod
    def _known_dist(cls, text: str) -> str:
        return ChannelDistribution.parse(text).describe()

    @field_validator("sweep_M", "sweep_J1", "sweep_N")
    @classmethod
    def _positive_sweep(cls, values: Tuple[int, ...]) -> Tuple[int, ...]:
        if any(v < 1 for v in values):
            raise ValueError(f"sweep values must be positive, got {list(values)}")
        return values

    @model_validator(mode="after")
    def _dithers_together(self) -> "Scenario":
        if (self.u is None) != (self.alpha is None):
            raise ValueError("u and alpha must be given together")
        if self.u is not None and len(self.u) != self.M:
            raise ValueError(f"u has length {len(self.u)}, expected M={self.M}")
        return self

    @property
    def dims(self) -> SystemDims:
        return SystemDims(M=self.M, J1=self.J1, J2=self.J2)

    @property
    def distribution(self) -> ChannelDistribution:
        return ChannelDistribution.parse(self.channel_dist)

    def grid(self, name: str) -> Tuple[int, ...]:
        """Sweep values for M, J1 or N, falling back to the single configured value"""
        return getattr(self, f"sweep_{name}") or (getattr(self, name),)


@dataclass
class RunRecord:
    digest: str
    version: str
    mode: str
    seed: int
    table: pd.DataFrame
    wall_clock: float
    csv_path: Path

    def to_json(self) -> Dict[str, Any]:
        return {"scenario_digest": self.digest, "toolkit_version": self.version, "mode": self.mode,
                "seed": self.seed, "wall_clock_s": round(self.wall_clock, 3),
                "csv_path": str(self.csv_path), "csv_sha256": compute_file_hash(str(self.csv_path)),
                "rows": len(self.table)}


def _parse_int(key: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        pass
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"malformed number for key '{key}': {text!r}")
    if not value.is_integer():
        raise ConfigError(f"key '{key}' must be an integer, got {text!r}")
    return int(value)


def _parse_float(key: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"malformed number for key '{key}': {text!r}")


def _parse_int_list(key: str, text: str) -> Tuple[int, ...]:
    """'2,3,5' or '2..4' or a mix of both"""
    values: List[int] = []
    for part in (p.strip() for p in text.split(",")):
        if not part:
            raise ConfigError(f"empty entry in key '{key}': {text!r}")
        if ".." in part:
            lo, hi = (_parse_int(key, s.strip()) for s in part.split("..", 1))
            if hi < lo:
                raise ConfigError(f"empty range {part!r} in key '{key}'")
            values.extend(range(lo, hi + 1))
        else:
            values.append(_parse_int(key, part))
    return tuple(values)


def _parse_value(section: str, key: str, text: str) -> Any:
    text = text.strip()
    if section == "sweep":
        return _parse_int_list(key, text)
    if key in ("M", "J1", "J2", "N", "KL", "trials", "seed"):
        return _parse_int(key, text)
    if key == "epsilon":
        return _parse_float(key, text)
    if key in ("P_dB", "u", "alpha"):
        return tuple(_parse_float(key, part.strip()) for part in text.split(","))
    if key == "simulate_pe":
        lowered = text.lower()
        if lowered not in configparser.ConfigParser.BOOLEAN_STATES:
            raise ConfigError(f"key 'simulate_pe' must be a boolean, got {text!r}")
        return configparser.ConfigParser.BOOLEAN_STATES[lowered]
    return text


def parse_config(path: Union[str, Path], overrides: Optional[Dict[str, Any]] = None) -> Scenario:
    """Read a scenario file; overrides (e.g. mode, seed from the CLI) win over file values"""
    p = Path(path)
    if not p.exists():
        logger.error("Config not found", extra={"extra": {"path": str(p)}})
        raise ConfigError(f"config file not found: {p}")

    parser = configparser.ConfigParser(interpolation=None, default_section="__defaults__")
    parser.optionxform = str
    try:
        parser.read_string(p.read_text(), source=str(p))
    except configparser.Error as e:
        raise ConfigError(f"malformed config {p}: {e}")

    fields: Dict[str, Any] = {}
    for section in parser.sections():
        if section not in CONFIG_KEYS:
            raise ConfigError(f"unknown section '[{section}]'")
        for key, text in parser.items(section):
            if key not in CONFIG_KEYS[section]:
                raise ConfigError(f"unknown key '{key}' in [{section}]")
            fields[CONFIG_KEYS[section][key]] = _parse_value(section, key, text)

    if "channel_file" in fields:
        fields["channel_file"] = str(p.parent / fields["channel_file"])
    fields.update({k: v for k, v in (overrides or {}).items() if v is not None})
    for section, key in REQUIRED_KEYS:
        if CONFIG_KEYS[section][key] not in fields:
            raise ConfigError(f"missing required key '{key}' in [{section}]")

    try:
        scenario = Scenario(**fields)
    except ValidationError as e:
        err = e.errors()[0]
        key = str(err["loc"][0]) if err["loc"] else "u"
        raise ConfigError(f"invalid value for key '{key.replace('sweep_', '')}': {err['msg']}")

    logger.info(f"Parsed scenario from {p}", extra={"extra": {"mode": scenario.mode, "seed": scenario.seed}})
    return scenario


def sample_scenario_channels(scenario: Scenario) -> ChannelSet:
    """Gains from channel_file when set, else drawn from the channel substream"""
    if scenario.channel_file is None:
        return sample_channels(scenario.dims, seed_substream(scenario.seed, "channel"), scenario.distribution)
    try:
        ch = load_channel_set(scenario.channel_file)
    except FileNotFoundError:
        raise ConfigError(f"channel file not found: {scenario.channel_file}")
    if ch.dims != scenario.dims:
        d = ch.dims
        raise ConfigError(f"channel file {scenario.channel_file} has M={d.M} J1={d.J1} J2={d.J2}, "
                          f"scenario declares M={scenario.M} J1={scenario.J1} J2={scenario.J2}")
    logger.info(f"Loaded channels from {scenario.channel_file}")
    return ch


def build_instance(scenario: Scenario) -> LinkInstance:
    """Channel and dithers drawn from their own substreams of the scenario seed unless pinned"""
    ch = sample_scenario_channels(scenario)
    dithers = (scenario.u, scenario.alpha) if scenario.u is not None else None
    return build_link_instance(ch, scenario.N, scenario.epsilon, seed_substream(scenario.seed, "dithers"),
                               KL=scenario.KL, dithers=dithers)


def check_caps(scenario: Scenario) -> None:
    """Basis size guard for every mode that materializes T and A"""
    needs_basis = scenario.mode in ("build", "ser", "leakage") or (scenario.mode == "rate" and scenario.simulate_pe)
    if not needs_basis:
        return
    _, Lp = cardinalities(scenario.M, scenario.J1, scenario.N)
    if Lp > config.caps.basis_cap:
        raise CapExceededError(
            f"mode '{scenario.mode}' needs Lp = {Lp} basis monomials, cap is {config.caps.basis_cap}")


def _scheme_KL(scenario: Scenario, L: int, Lp: int) -> int:
    return scenario.KL if scenario.KL is not None else choose_KL(scenario.M, L, Lp)


def _run_build(scenario: Scenario, out_dir: Path, threads: int) -> Dict[str, pd.DataFrame]:
    basis = build_basis(scenario.dims, scenario.N)
    stats = alignment_stats(basis)
    if scenario.KL is not None:
        KL = scenario.KL
    else:
        KL = basis.ML - basis.Lp if basis.ML > basis.Lp else None

    export_exponents_text(basis, out_dir / "basis_T.txt")
    for j in range(scenario.J1):
        export_selection_text(build_selection(j, basis), out_dir / f"selection_{j}.txt")

    rows = [{"M": scenario.M, "J1": scenario.J1, "N": scenario.N, "L": basis.L, "Lp": basis.Lp,
             "ML": basis.ML, "KL": KL, "receiver": j, "legit_distinct": distinct,
             "eaves_generators": stats.eaves_generators}
            for j, distinct in enumerate(stats.legit_distinct)]
    table = pd.DataFrame(rows)
    table["KL"] = table["KL"].astype("Int64")
    print(table.to_string(index=False))
    return {"build": table}


def _run_ser(scenario: Scenario, out_dir: Path, threads: int) -> Dict[str, pd.DataFrame]:
    instance = build_instance(scenario)
    return {"ser": run_ser_trials(instance, scenario.P_dB, scenario.trials, scenario.seed, threads=threads)}


def _run_leakage(scenario: Scenario, out_dir: Path, threads: int) -> Dict[str, pd.DataFrame]:
    instance = build_instance(scenario)
    full = leakage_curve(instance, scenario.P_dB, threads=threads)
    ablation = leakage_curve(instance, scenario.P_dB, with_noise_symbols=False, threads=threads)
    return {"leakage": leakage_table(full), "leakage_no_noise": leakage_table(ablation)}


def _run_rate(scenario: Scenario, out_dir: Path, threads: int) -> Dict[str, pd.DataFrame]:
    L, Lp = cardinalities(scenario.M, scenario.J1, scenario.N)
    KL = _scheme_KL(scenario, L, Lp)
    ch = sample_scenario_channels(scenario)
    tables = {"rate": rate_table(scenario.P_dB, scenario.epsilon, KL, L, Lp, scenario.M, ch.c)}

    if scenario.simulate_pe:
        instance = build_instance(scenario)
        ser = run_ser_trials(instance, scenario.P_dB, scenario.trials, scenario.seed, threads=threads)
        # union bound from the worst receiver's symbol error rate to the b1 vector error rate
        worst = ser.groupby("P_dB")["ser"].max()
        pe = {float(P_dB): min(1.0, instance.cfg.KL * float(s)) for P_dB, s in worst.items()}
        tables["rate_simulated"] = rate_table(scenario.P_dB, scenario.epsilon, KL, L, Lp, scenario.M, ch.c, pe)
    return tables


def _run_dof(scenario: Scenario, out_dir: Path, threads: int) -> Dict[str, pd.DataFrame]:
    rows = []
    for M, J1, N in product(scenario.grid("M"), scenario.grid("J1"), scenario.grid("N")):
        L, Lp = cardinalities(M, J1, N)
        if M * L <= Lp:
            logger.info(f"Skipping M={M} J1={J1} N={N}: ML={M * L} <= Lp={Lp}")
            continue
        KL = M * L - Lp
        rows.append({"M": M, "J1": J1, "N": N, "L": L, "Lp": Lp, "KL": KL,
                     "K_printed": printed_K(M, L, Lp), "epsilon": scenario.epsilon,
                     "dof": dof_formula(KL, L, Lp, M, scenario.epsilon), "dof_limit": dof_limit(M)})
    if not rows:
        raise InfeasibleInstanceError("no (M, J1, N) in the sweep satisfies ML > Lp")
    columns = ["M", "J1", "N", "L", "Lp", "KL", "K_printed", "epsilon", "dof", "dof_limit"]
    table = pd.DataFrame(rows, columns=columns)
    # exact Python integers; int64 would overflow for large N
    table = table.astype({"L": object, "Lp": object, "KL": object})
    return {"dof": table}


def _run_feasibility(scenario: Scenario, out_dir: Path, threads: int) -> Dict[str, pd.DataFrame]:
    grid = list(product(scenario.grid("M"), scenario.grid("J1")))
    return {"feasibility": compare_feasibility(grid)}


def _run_baseline(scenario: Scenario, out_dir: Path, threads: int) -> Dict[str, pd.DataFrame]:
    ch = sample_scenario_channels(scenario)
    return {"baseline": baseline_report(ch, nullspace_plan(ch))}


RUNNERS = {
    "build": _run_build,
    "ser": _run_ser,
    "leakage": _run_leakage,
    "rate": _run_rate,
    "dof": _run_dof,
    "feasibility": _run_feasibility,
    "baseline": _run_baseline,
}

TABLE_SCHEMAS = {"leakage_no_noise": "leakage", "rate_simulated": "rate"}


def run(scenario: Scenario, out_dir: Union[str, Path, None] = None, plot: bool = False,
        threads: int = 1) -> RunRecord:
    """Dispatch the scenario's mode, write its CSV(s) and run_record.json"""
    if threads < 1:
        raise ConfigError(f"threads must be >= 1, got {threads}")
    out = Path(out_dir or config.output_folder)
    out.mkdir(parents=True, exist_ok=True)
    check_caps(scenario)

    payload = scenario.model_dump(mode="json")
    if scenario.channel_file is not None:
        # content, not location
        payload["channel_file"] = compute_file_hash(scenario.channel_file)
    digest = scenario_digest(payload)
    logger.info(f"Running mode '{scenario.mode}'", extra={"extra": {"digest": digest, "seed": scenario.seed}})
    started = time.perf_counter()

    tables = RUNNERS[scenario.mode](scenario, out, threads)
    paths = {name: write_table(table, TABLE_SCHEMAS.get(name, name), out, name=name)
             for name, table in tables.items()}
    primary = tables[scenario.mode]

    if plot:
        plotter = PLOTTERS.get(scenario.mode)
        if plotter is None:
            logger.warning(f"No chart defined for mode '{scenario.mode}'")
        else:
            plotter(primary, out / f"{scenario.mode}.svg")

    record = RunRecord(digest=digest, version=TOOLKIT_VERSION, mode=scenario.mode, seed=scenario.seed,
                       table=primary, wall_clock=time.perf_counter() - started,
                       csv_path=paths[scenario.mode])
    write_run_record(record.to_json(), out / "run_record.json")
    logger.info(f"Mode '{scenario.mode}' complete in {record.wall_clock:.2f}s",
                extra={"extra": {"csv": str(record.csv_path)}})
    return record


def _seed_arg(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}")
    if not 0 <= value <= MAX_SEED:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="exp_harness",
        description="Artificial-noise alignment experiments on the compound wiretap channel",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__.split("A scenario file is INI-style:", 1)[1].split("Unless pinned", 1)[0].rstrip()
        + "\n\nexit codes: 0 ok, 2 config error, 3 cap exceeded, 4 infeasible instance",
    )
    parser.add_argument("--config", required=True, help="scenario file (INI sections system/scheme/run/sweep)")
    parser.add_argument("--out", help=f"output directory (default: OUT_DIR or {config.output_folder})")
    parser.add_argument("--seed", type=_seed_arg, help="master seed, overrides [run] seed")
    parser.add_argument("--plot", action="store_true", help="also write an SVG chart of the primary curve")
    parser.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")

    sub = parser.add_subparsers(dest="mode", required=True, metavar="MODE")
    sub.add_parser("build", help="basis sizes and alignment counts, debug exports")
    sub.add_parser("ser", help="symbol error rate of b1 at the legitimate receivers")
    sub.add_parser("leakage", help="numerical I(b1;y) and I(b1;z), with the b2 = 0 ablation")
    sub.add_parser("rate", help="secrecy-rate lower bound (formula, optionally with simulated Pr(e))")
    sub.add_parser("dof", help="secure DoF over an (M, J1, N) sweep")
    sub.add_parser("feasibility", help="null-space baseline versus alignment feasibility")
    sub.add_parser("baseline", help="null-space plan signal and noise gains")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging()
    try:
        scenario = parse_config(args.config, overrides={"mode": args.mode, "seed": args.seed})
        record = run(scenario, out_dir=args.out, plot=args.plot, threads=args.threads)
    except ToolkitError as e:
        logger.error(str(e), extra={"extra": {"error": type(e).__name__, "exit_code": e.exit_code}})
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    print(f"wrote {record.csv_path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
