#!/usr/bin/env python3
"""
secrecy_analysis.py - Secrecy-rate bounds, secure DoF and numerical leakage

Formula mode evaluates the chained lower bound
    R >= H(b1) - [1 + Pr(e) H(b1)] - max(0, 1/2 log2(cP + 1) - H(b2))
with the o_P(1) terms dropped. Simulation mode replaces Pr(e) with a measured
SER and the information terms with I(b1; y_j), I(b1; z_k) integrated over the
exact Gaussian-mixture output densities.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import integrate
from scipy.special import logsumexp

from config import config
from errors import CapExceededError, ConfigError, InfeasibleInstanceError
from modem import (ConstellationParams, EffectiveChannel, LinkInstance, SchemeConfig,
                   constellation_params, constellation_size, eaves_effective_channel,
                   legit_effective_channel, symbol_grid)
from seed_streams import SeedLike, as_generator

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)
WINDOW_SIGMAS = 8.0
QUAD_RTOL = 1e-4


@dataclass(frozen=True)
class RateReport:
    P: float
    Q: int
    H_b1: float
    fano_term: float
    leakage_bound: float
    R_lower: float
    d_formula: float


@dataclass(frozen=True)
class LeakageEstimate:
    P: float
    I_b1_y: float
    I_b1_z: float
    normalized_leakage: float


def entropy_b1(KL: int, Q: int) -> float:
    """H(b1) = KL log2(2Q + 1) bits"""
    if KL < 1 or Q < 1:
        raise ConfigError(f"entropy_b1 needs KL >= 1 and Q >= 1, got KL={KL}, Q={Q}")
    return KL * math.log2(2 * Q + 1)


def _check_condition(KL: int, Lp: int, ML: int) -> None:
    if KL + Lp < ML:
        raise InfeasibleInstanceError(f"KL + Lp >= ML violated: {KL} + {Lp} < {ML}")


def dof_formula(KL: int, L: int, Lp: int, M: int, epsilon: float) -> float:
    """d = (K + M) L (1 - eps) / (KL + Lp + eps) - 1 with K = KL / L, evaluated exactly"""
    _check_condition(KL, Lp, M * L)
    if not 0 <= epsilon < 1:
        raise ConfigError(f"epsilon must lie in [0, 1), got {epsilon}")
    eps = Fraction(epsilon)
    d = Fraction(KL + M * L) * (1 - eps) / (KL + Lp + eps) - 1
    return float(d)


def dof_limit(M: int) -> float:
    """1 - 1/M"""
    if M < 1:
        raise ConfigError(f"M must be >= 1, got {M}")
    return 1.0 - 1.0 / M


def printed_K(M: int, L: int, Lp: int) -> float:
    """The alternative K-selection M - L/Lp, reported next to KL for comparison only"""
    return float(M - Fraction(L, Lp))


def asymptotic_rate(P: float, KL: int, L: int, Lp: int, M: int, epsilon: float) -> float:
    """1/2 d log2 P, floored at 0"""
    return max(0.0, 0.5 * dof_formula(KL, L, Lp, M, epsilon) * math.log2(P))


def rate_lower_bound(P: float, epsilon: float, KL: int, L: int, Lp: int, M: int, c: float,
                     empirical_pe: Optional[float] = None) -> RateReport:
    """Chained secrecy-rate bound at one power budget"""
    ML = M * L
    _check_condition(KL, Lp, ML)
    if c < 0:
        raise ConfigError(f"c must be nonnegative, got {c}")
    pe = 0.0 if empirical_pe is None else float(empirical_pe)
    if not 0.0 <= pe <= 1.0:
        raise ConfigError(f"empirical error probability must lie in [0, 1], got {pe}")

    Q = constellation_size(P, epsilon, KL, Lp)
    H_b1 = entropy_b1(KL, Q)
    fano = 1.0 + pe * H_b1
    leak = max(0.0, 0.5 * math.log2(c * P + 1.0) - ML * math.log2(2 * Q + 1))
    R = max(0.0, H_b1 - fano - leak)
    return RateReport(P=float(P), Q=Q, H_b1=H_b1, fano_term=fano, leakage_bound=leak,
                      R_lower=R, d_formula=dof_formula(KL, L, Lp, M, epsilon))


def rate_table(P_dB_grid: Sequence[float], epsilon: float, KL: int, L: int, Lp: int, M: int, c: float,
               empirical_pe: Optional[Dict[float, float]] = None) -> pd.DataFrame:
    """RateReports over a dB grid as a table (P_dB,H_b1,fano,leak_bound,R_lower,dof)"""
    rows = []
    for P_dB in P_dB_grid:
        pe = None if empirical_pe is None else empirical_pe.get(float(P_dB))
        report = rate_lower_bound(10.0 ** (float(P_dB) / 10.0), epsilon, KL, L, Lp, M, c, pe)
        rows.append({"P_dB": float(P_dB), "H_b1": report.H_b1, "fano": report.fano_term,
                     "leak_bound": report.leakage_bound, "R_lower": report.R_lower,
                     "dof": report.d_formula})
    return pd.DataFrame(rows, columns=["P_dB", "H_b1", "fano", "leak_bound", "R_lower", "dof"])


def _mixture_means(eff: EffectiveChannel, params: ConstellationParams, cfg: SchemeConfig,
                   with_noise_symbols: bool) -> np.ndarray:
    """Noiseless outputs a (hhat^T b1 + htilde^T coeffs(b2)), shape (#b1, #b2)"""
    s1 = symbol_grid([params.Q] * cfg.KL) @ eff.hhat
    if with_noise_symbols:
        b2 = symbol_grid([params.Q] * cfg.ML)
    else:
        b2 = np.zeros((1, cfg.ML), dtype=np.int64)
    s2 = eff.coefficients(b2) @ eff.htilde
    return params.a * (s1[:, None] + s2[None, :])


def _check_mi_regime(params: ConstellationParams, cfg: SchemeConfig, cap: Optional[int]) -> None:
    cap = config.caps.mutual_info_cap if cap is None else cap
    size = (2 * params.Q + 1) ** (cfg.KL + cfg.ML)
    if size > cap:
        raise CapExceededError(
            f"exact mutual information needs {size} mixture components, cap is {cap}; use the formula bounds")


def _log_conditionals(y: np.ndarray, means: np.ndarray, noise_var: float) -> np.ndarray:
    """log p(y | b1) for every b1; y has shape (S,), result (S, #b1)"""
    sq = (y[:, None, None] - means[None, :, :]) ** 2
    log_comp = -sq / (2.0 * noise_var)
    return (logsumexp(log_comp, axis=2) - math.log(means.shape[1])
            - 0.5 * math.log(2.0 * math.pi * noise_var))


def _merged_windows(centers: np.ndarray, half_width: float) -> List[tuple]:
    windows = []
    for c in np.sort(centers):
        lo, hi = c - half_width, c + half_width
        if windows and lo <= windows[-1][1]:
            windows[-1][1] = hi
            windows[-1][2].append(c)
        else:
            windows.append([lo, hi, [c]])
    return [(lo, hi, pts) for lo, hi, pts in windows]


def mutual_info_exact(eff: EffectiveChannel, params: ConstellationParams, cfg: SchemeConfig,
                      side: Optional[str] = None, noise_var: float = 1.0,
                      with_noise_symbols: bool = True, cap: Optional[int] = None) -> float:
    """I(b1; a (hhat^T b1 + htilde^T coeffs(b2)) + n) in bits, n ~ N(0, noise_var)

    Integrates sum_b1 p(b1) p(y|b1) log(p(y|b1) / p(y)) by adaptive quadrature
    over the union of +-8 sigma windows around the mixture means.
    """
    if side is not None and side != eff.side:
        raise ValueError(f"effective channel is {eff.side}, requested {side}")
    if not noise_var > 0:
        raise ConfigError(f"noise variance must be positive, got {noise_var}")
    _check_mi_regime(params, cfg, cap)

    means = _mixture_means(eff, params, cfg, with_noise_symbols)
    n_b1 = means.shape[0]

    def integrand(y: float) -> float:
        log_cond = _log_conditionals(np.array([y]), means, noise_var)[0]
        log_marg = logsumexp(log_cond) - math.log(n_b1)
        return float(np.sum(np.exp(log_cond) * (log_cond - log_marg)) / n_b1)

    sigma = math.sqrt(noise_var)
    total = 0.0
    for lo, hi, centers in _merged_windows(np.unique(means), WINDOW_SIGMAS * sigma):
        pts = sorted(set(centers))
        value, _ = integrate.quad(integrand, lo, hi, points=pts, epsabs=1e-12, epsrel=QUAD_RTOL,
                                  limit=max(50, 4 * len(pts) + 50))
        total += value

    bits = max(0.0, total / LN2)
    logger.debug(f"I(b1; {eff.side}[{eff.index}]) = {bits:.6f} bits at P={params.P:.4g} "
                 f"(Q={params.Q}, noise symbols {'on' if with_noise_symbols else 'off'})")
    return bits


def mutual_info_monte_carlo(eff: EffectiveChannel, params: ConstellationParams, cfg: SchemeConfig,
                            samples: int, seed: SeedLike = None, noise_var: float = 1.0,
                            with_noise_symbols: bool = True, chunk: int = 50_000) -> float:
    """Sampling estimate of the same quantity: mean of log2 p(y|b1) - log2 p(y) over draws"""
    _check_mi_regime(params, cfg, None)
    rng = as_generator(seed)
    means = _mixture_means(eff, params, cfg, with_noise_symbols)
    n_b1, n_b2 = means.shape
    total = 0.0
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        i1 = rng.integers(0, n_b1, size=n)
        i2 = rng.integers(0, n_b2, size=n)
        y = means[i1, i2] + math.sqrt(noise_var) * rng.standard_normal(n)
        log_cond = _log_conditionals(y, means, noise_var)
        log_marg = logsumexp(log_cond, axis=1) - math.log(n_b1)
        total += float(np.sum(log_cond[np.arange(n), i1] - log_marg))
        done += n
    return total / samples / LN2


def _leakage_point(instance: LinkInstance, P_dB: float, with_noise_symbols: bool,
                   cap: Optional[int]) -> LeakageEstimate:
    ch, basis, cfg = instance.ch, instance.basis, instance.cfg
    P = 10.0 ** (float(P_dB) / 10.0)
    params = constellation_params(P, cfg.epsilon, cfg.KL, cfg.Lp, cfg, instance.precoder)
    I_y = min(mutual_info_exact(legit_effective_channel(j, ch, basis, cfg), params, cfg, "legitimate",
                                with_noise_symbols=with_noise_symbols, cap=cap)
              for j in range(ch.dims.J1))
    I_z = max((mutual_info_exact(eaves_effective_channel(k, ch, basis, cfg), params, cfg, "eavesdropper",
                                 with_noise_symbols=with_noise_symbols, cap=cap)
               for k in range(ch.dims.J2)), default=0.0)
    return LeakageEstimate(P=P, I_b1_y=I_y, I_b1_z=I_z, normalized_leakage=I_z / (0.5 * math.log2(P)))


def leakage_curve(instance: LinkInstance, P_dB_grid: Sequence[float], with_noise_symbols: bool = True,
                  threads: int = 1, cap: Optional[int] = None) -> List[LeakageEstimate]:
    """min_j I(b1; y_j) and max_k I(b1; z_k) at every grid point"""
    for P_dB in P_dB_grid:
        P = 10.0 ** (float(P_dB) / 10.0)
        cfg = instance.cfg
        _check_mi_regime(ConstellationParams(Q=constellation_size(P, cfg.epsilon, cfg.KL, cfg.Lp), a=1.0, P=P),
                         cfg, cap)

    def work(P_dB):
        return _leakage_point(instance, P_dB, with_noise_symbols, cap)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            estimates = list(pool.map(work, P_dB_grid))
    else:
        estimates = [work(P_dB) for P_dB in P_dB_grid]

    for est in estimates:
        logger.info(f"Leakage at {10 * math.log10(est.P):.1f} dB: I(b1;y)={est.I_b1_y:.4f}, "
                    f"I(b1;z)={est.I_b1_z:.4f}, normalized={est.normalized_leakage:.4f}")
    return estimates


def leakage_table(estimates: Sequence[LeakageEstimate]) -> pd.DataFrame:
    rows = [{"P_dB": round(10.0 * math.log10(est.P), 10), "I_b1_y": est.I_b1_y, "I_b1_z": est.I_b1_z,
             "norm_leak": est.normalized_leakage} for est in estimates]
    return pd.DataFrame(rows, columns=["P_dB", "I_b1_y", "I_b1_z", "norm_leak"])
