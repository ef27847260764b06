#!/usr/bin/env python3
"""
results_io.py - Output table schemas, atomic CSV writes and run records
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

import pandas as pd
import pandera.pandas as pa
from pandera.pandas import Check, Column, DataFrameSchema

logger = logging.getLogger(__name__)

SER_SCHEMA = DataFrameSchema({
    "P_dB": Column(float),
    "receiver": Column(int, Check.ge(0)),
    "trials": Column(int, Check.ge(1)),
    "errors": Column(int, Check.ge(0)),
    "ser": Column(float, Check.in_range(0.0, 1.0)),
}, strict=True, ordered=True)

RATE_SCHEMA = DataFrameSchema({
    "P_dB": Column(float),
    "H_b1": Column(float, Check.gt(0.0)),
    "fano": Column(float, Check.ge(1.0)),
    "leak_bound": Column(float, Check.ge(0.0)),
    "R_lower": Column(float, Check.ge(0.0)),
    "dof": Column(float),
}, strict=True, ordered=True)

LEAKAGE_SCHEMA = DataFrameSchema({
    "P_dB": Column(float),
    "I_b1_y": Column(float, Check.ge(0.0)),
    "I_b1_z": Column(float, Check.ge(0.0)),
    "norm_leak": Column(float, Check.ge(0.0)),
}, strict=True, ordered=True)

FEASIBILITY_SCHEMA = DataFrameSchema({
    "M": Column(int, Check.ge(1)),
    "J1": Column(int, Check.ge(1)),
    "baseline_feasible": Column(bool),
    "min_N_alignment": Column("Int64", Check.ge(1), nullable=True),
}, strict=True, ordered=True)

# L, Lp and KL are exact Python integers and may exceed int64, so their dtype is not pinned
DOF_SCHEMA = DataFrameSchema({
    "M": Column(int, Check.ge(1)),
    "J1": Column(int, Check.ge(1)),
    "N": Column(int, Check.ge(1)),
    "L": Column(),
    "Lp": Column(),
    "KL": Column(),
    "K_printed": Column(float),
    "epsilon": Column(float, Check.in_range(0.0, 1.0, include_max=False)),
    "dof": Column(float),
    "dof_limit": Column(float),
}, strict=True, ordered=True)

BUILD_SCHEMA = DataFrameSchema({
    "M": Column(int, Check.ge(1)),
    "J1": Column(int, Check.ge(1)),
    "N": Column(int, Check.ge(1)),
    "L": Column(int, Check.ge(1)),
    "Lp": Column(int, Check.ge(1)),
    "ML": Column(int, Check.ge(1)),
    "KL": Column("Int64", Check.ge(1), nullable=True),
    "receiver": Column(int, Check.ge(0)),
    "legit_distinct": Column(int, Check.ge(1)),
    "eaves_generators": Column(int, Check.ge(1)),
}, strict=True, ordered=True)

BASELINE_SCHEMA = DataFrameSchema({
    "role": Column(str, Check.isin(["legitimate", "eavesdropper"])),
    "index": Column(int, Check.ge(0)),
    "signal_gain": Column(float, Check.ge(0.0)),
    "noise_gain": Column(float, Check.ge(0.0)),
}, strict=True, ordered=True)

SCHEMAS: Dict[str, pa.DataFrameSchema] = {
    "ser": SER_SCHEMA,
    "rate": RATE_SCHEMA,
    "leakage": LEAKAGE_SCHEMA,
    "feasibility": FEASIBILITY_SCHEMA,
    "dof": DOF_SCHEMA,
    "build": BUILD_SCHEMA,
    "baseline": BASELINE_SCHEMA,
}


def validate_table(df: pd.DataFrame, kind: str) -> pd.DataFrame:
    """Check a result table against its declared CSV schema"""
    return SCHEMAS[kind].validate(df)


def write_csv_secure(df: pd.DataFrame, path: Union[str, Path]) -> None:
    """Write via a temp file and rename so readers never see a partial CSV"""
    p = Path(path)
    tmp = p.with_suffix(".tmp")
    df.to_csv(tmp, index=False, lineterminator="\n")
    tmp.replace(p)
    logger.debug(f"Wrote {len(df)} rows to {p}")


def write_table(df: pd.DataFrame, kind: str, out_dir: Union[str, Path], name: str = "") -> Path:
    """Validate and atomically write <name or kind>.csv into out_dir"""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{name or kind}.csv"
    write_csv_secure(validate_table(df, kind), path)
    return path


def write_run_record(record: Dict[str, Any], path: Union[str, Path]) -> None:
    p = Path(path)
    tmp = p.with_suffix(".tmp")
    tmp.write_text(json.dumps(record, indent=2, sort_keys=True, default=str) + "\n")
    tmp.replace(p)
