#!/usr/bin/env python3
"""
plot_results.py - SVG line charts of the primary curve of each mode
"""

import logging
from pathlib import Path
from typing import Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

logger = logging.getLogger(__name__)

# fixed hash salt and no date keep the SVG byte-identical across runs
matplotlib.rcParams["svg.hashsalt"] = "noise-alignment"
SVG_METADATA = {"Date": None}


def _save(fig, path: Union[str, Path]) -> Path:
    p = Path(path)
    tmp = p.with_suffix(".tmp")
    fig.savefig(tmp, format="svg", metadata=SVG_METADATA)
    plt.close(fig)
    tmp.replace(p)
    logger.info(f"Wrote chart {p}")
    return p


def plot_ser(table: pd.DataFrame, path: Union[str, Path]) -> Path:
    """SER of b1 versus P (dB), one line per legitimate receiver, log y-axis"""
    fig, ax = plt.subplots(figsize=(6, 4))
    for receiver, group in table.groupby("receiver", sort=True):
        # zero error counts have no place on a log axis
        shown = group[group["ser"] > 0]
        ax.semilogy(shown["P_dB"], shown["ser"], "o-", label=f"receiver {receiver}")
    ax.set_xlabel("P (dB)")
    ax.set_ylabel("symbol error rate")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="upper right")
    return _save(fig, path)


def plot_leakage(table: pd.DataFrame, path: Union[str, Path]) -> Path:
    """I(b1;y), I(b1;z) and normalized leakage versus P (dB)"""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(table["P_dB"], table["I_b1_y"], "o-", label="min_j I(b1; y_j)")
    ax.plot(table["P_dB"], table["I_b1_z"], "s-", label="max_k I(b1; z_k)")
    ax.plot(table["P_dB"], table["norm_leak"], "^--", label="I(b1; z) / (0.5 log2 P)")
    ax.set_xlabel("P (dB)")
    ax.set_ylabel("bits")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best")
    return _save(fig, path)


def plot_dof(table: pd.DataFrame, path: Union[str, Path]) -> Path:
    """Secure DoF versus N for every (M, J1), with the 1 - 1/M limit dashed"""
    fig, ax = plt.subplots(figsize=(6, 4))
    for (M, J1), group in table.groupby(["M", "J1"], sort=True):
        line, = ax.plot(group["N"], group["dof"], "o-", label=f"M={M}, J1={J1}")
        ax.axhline(group["dof_limit"].iloc[0], color=line.get_color(), linestyle=":", linewidth=0.8)
    ax.set_xlabel("N")
    ax.set_ylabel("secure DoF")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="lower right")
    return _save(fig, path)


def plot_rate(table: pd.DataFrame, path: Union[str, Path]) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(table["P_dB"], table["R_lower"], "o-", label="R lower bound")
    ax.plot(table["P_dB"], table["H_b1"], "s--", label="H(b1)")
    ax.set_xlabel("P (dB)")
    ax.set_ylabel("bits per channel use")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="upper left")
    return _save(fig, path)


PLOTTERS = {
    "ser": plot_ser,
    "leakage": plot_leakage,
    "dof": plot_dof,
    "rate": plot_rate,
}
