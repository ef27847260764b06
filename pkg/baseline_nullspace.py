#!/usr/bin/env python3
"""
baseline_nullspace.py - Null-space artificial-noise baseline and feasibility boundary

The baseline beams the message toward the legitimate receivers and sends
noise in the orthogonal complement of span{h_1, ..., h_J1}. That complement is
empty once J1 >= M; the alignment scheme only needs M * N^(M J1) > (N+1)^(M J1)
for some N.
"""

import logging
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Optional, Tuple, Union

import numpy as np
import pandas as pd
from scipy import linalg, optimize

from channel_model import ChannelSet, SystemDims
from config import config
from errors import InfeasibleInstanceError
from monomial_precoder import cardinalities

logger = logging.getLogger(__name__)

# Beam search resolution: every sign pattern of the equal-gain direction pinv(H) s,
# every normalized h_j, and RANDOM_DIRECTIONS seeded directions, then Nelder-Mead
# refinement to REFINE_TOL.
RANDOM_DIRECTIONS = 256
REFINE_TOL = 1e-10


@dataclass(frozen=True)
class NullspaceNoisePlan:
    """Unit signal beam and an orthonormal noise basis orthogonal to every h_j"""
    signal_dir: np.ndarray
    noise_basis: np.ndarray
    min_gain: float


def _min_gain(H: np.ndarray, s: np.ndarray) -> float:
    norm = np.linalg.norm(s)
    if norm == 0:
        return 0.0
    return float(np.min(np.abs(H @ s)) / norm)


def _beam_candidates(H: np.ndarray) -> np.ndarray:
    J1, M = H.shape
    pinv = np.linalg.pinv(H)
    candidates = [pinv @ np.array((1.0,) + signs) for signs in product((1.0, -1.0), repeat=J1 - 1)]
    candidates.extend(H)
    candidates.extend(np.random.default_rng(0).standard_normal((RANDOM_DIRECTIONS, M)))
    return np.array(candidates)


def _max_min_beam(H: np.ndarray) -> Tuple[np.ndarray, float]:
    candidates = _beam_candidates(H)
    gains = [_min_gain(H, s) for s in candidates]
    best = candidates[int(np.argmax(gains))]

    result = optimize.minimize(lambda s: -_min_gain(H, s), best, method="Nelder-Mead",
                               options={"xatol": REFINE_TOL, "fatol": REFINE_TOL, "maxiter": 4000})
    if -result.fun > max(gains):
        best = result.x
    s = best / np.linalg.norm(best)
    if H[0] @ s < 0:
        s = -s
    return s, _min_gain(H, s)


def nullspace_plan(ch: ChannelSet) -> NullspaceNoisePlan:
    """Orthogonal-complement noise basis plus the max-min-gain signal beam"""
    J1, M = ch.H.shape
    if J1 >= M:
        raise InfeasibleInstanceError(
            f"no direction lies in the null space of all {J1} legitimate receivers with M={M} antennas")

    noise_basis = linalg.null_space(ch.H)
    # fix the sign of every column so the plan is reproducible
    pivots = np.argmax(np.abs(noise_basis), axis=0)
    noise_basis = noise_basis * np.sign(noise_basis[pivots, np.arange(noise_basis.shape[1])])

    signal_dir, gain = _max_min_beam(ch.H)
    logger.info(f"Null-space plan M={M} J1={J1}: {noise_basis.shape[1]} noise dims, min signal gain {gain:.4g}")
    return NullspaceNoisePlan(signal_dir=signal_dir, noise_basis=noise_basis, min_gain=gain)


def baseline_report(ch: ChannelSet, plan: NullspaceNoisePlan) -> pd.DataFrame:
    """Signal gain |h.s| and noise leakage ||h^T N|| at every node"""
    rows = []
    for role, gains in (("legitimate", ch.H), ("eavesdropper", ch.G)):
        for idx, h in enumerate(gains):
            rows.append({"role": role, "index": idx,
                         "signal_gain": float(abs(h @ plan.signal_dir)),
                         "noise_gain": float(np.linalg.norm(h @ plan.noise_basis))})
    return pd.DataFrame(rows, columns=["role", "index", "signal_gain", "noise_gain"])


def min_alignment_N(M: int, J1: int, cap: Optional[int] = None) -> Optional[int]:
    """Smallest N with M L > Lp and Lp under the basis cap, or None"""
    cap = config.caps.basis_cap if cap is None else cap
    if M < 2:
        return None
    N = 1
    while True:
        L, Lp = cardinalities(M, J1, N)
        if Lp > cap:
            return None
        if M * L > Lp:
            return N
        N += 1


def compare_feasibility(dims_grid: Iterable[Union[SystemDims, Tuple[int, int]]],
                        cap: Optional[int] = None) -> pd.DataFrame:
    """Baseline feasibility (J1 < M) next to the smallest alignment-feasible N"""
    rows = []
    for dims in dims_grid:
        M, J1 = (dims.M, dims.J1) if isinstance(dims, SystemDims) else (int(dims[0]), int(dims[1]))
        rows.append({"M": M, "J1": J1, "baseline_feasible": J1 < M,
                     "min_N_alignment": min_alignment_N(M, J1, cap)})
    table = pd.DataFrame(rows, columns=["M", "J1", "baseline_feasible", "min_N_alignment"])
    table["min_N_alignment"] = table["min_N_alignment"].astype("Int64")
    return table
