#!/usr/bin/env python3
"""
modem.py - PAM constellation, transmit synthesis and minimum-distance decoding

Transmit vector:  x = u (alpha^T (a b1)) + V (a b2)
Legitimate rx:    y_j = a (h^_j^T b1 + h~^T T_j b2) + v_j
Eavesdropper:     z_k = a (g^_k^T b1 + g~_k^T b2) + w_k

Symbols are integers in [-Q, Q]; the spacing a is applied only when encoding.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from channel_model import ChannelSet, SystemDims, apply_channel_batch
from config import config
from errors import CapExceededError, ConfigError, InfeasibleInstanceError
from monomial_precoder import (PrecoderBasis, PrecoderMatrix, SelectionMatrix, build_basis,
                               build_selection, build_V, evaluate_exponents)
from seed_streams import SeedLike, as_generator, seed_substream

logger = logging.getLogger(__name__)

DITHER_LOW = 0.5
DITHER_HIGH = 1.5


@dataclass(frozen=True)
class SchemeConfig:
    """Symbol counts, public dithers u (length M) and alpha (length KL), rate-loss epsilon"""
    N: int
    KL: int
    ML: int
    Lp: int
    u: np.ndarray
    alpha: np.ndarray
    epsilon: float

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float).ravel()
        alpha = np.asarray(self.alpha, dtype=float).ravel()
        if self.KL < 1:
            raise ConfigError(f"KL must be >= 1, got {self.KL}")
        if alpha.size != self.KL:
            raise ConfigError(f"alpha has length {alpha.size}, expected KL={self.KL}")
        if not 0 < self.epsilon < 1:
            raise ConfigError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.KL + self.Lp < self.ML:
            raise InfeasibleInstanceError(
                f"KL + Lp >= ML violated: {self.KL} + {self.Lp} < {self.ML}")
        u.setflags(write=False)
        alpha.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "alpha", alpha)
        self.check_dithers()

    @property
    def M(self) -> int:
        return self.u.size

    def check_dithers(self) -> None:
        """Dither entries must be nonzero and pairwise distinct"""
        entries = np.concatenate([self.u, self.alpha])
        if np.any(entries == 0):
            raise ConfigError("dither entries must be nonzero")
        if np.unique(entries).size != entries.size:
            raise ConfigError("dither entries must be pairwise distinct")


@dataclass(frozen=True)
class ConstellationParams:
    """C = a {-Q, ..., Q} under power budget P"""
    Q: int
    a: float
    P: float

    def __post_init__(self):
        if self.Q < 1:
            raise ConfigError(f"Q must be >= 1, got {self.Q}")
        if not self.a > 0:
            raise ConfigError(f"a must be positive, got {self.a}")

    def points(self) -> np.ndarray:
        return self.a * np.arange(-self.Q, self.Q + 1)

    @property
    def symbol_variance(self) -> float:
        """Second moment of a uniform symbol on a {-Q..Q}"""
        return self.a ** 2 * self.Q * (self.Q + 1) / 3.0


@dataclass(frozen=True)
class TransmitFrame:
    b1: np.ndarray
    b2: np.ndarray
    x: np.ndarray


@dataclass(frozen=True)
class EffectiveChannel:
    """Scalar receive channel: output / a = hhat^T b1 + htilde^T coeffs(b2) + noise / a"""
    hhat: np.ndarray
    htilde: np.ndarray
    selection: Optional[SelectionMatrix]
    side: str
    index: int

    def coefficients(self, b2: np.ndarray) -> np.ndarray:
        """T_j b2 at a legitimate receiver, b2 itself at an eavesdropper"""
        return b2 if self.selection is None else self.selection.apply(b2)

    def noiseless(self, b1: np.ndarray, b2: np.ndarray) -> np.ndarray:
        return np.asarray(b1) @ self.hhat + self.coefficients(np.asarray(b2)) @ self.htilde

    def coefficient_layout(self) -> Tuple[np.ndarray, np.ndarray]:
        """(rows carrying noise, number of noise symbols summed on each)"""
        if self.selection is None:
            return np.arange(self.htilde.size), np.ones(self.htilde.size, dtype=np.int64)
        sums = self.selection.row_sums()
        active = np.flatnonzero(sums)
        return active, sums[active]


@dataclass(frozen=True)
class LinkInstance:
    """A realized scheme: channel, basis, precoder and scheme configuration"""
    ch: ChannelSet
    basis: PrecoderBasis
    precoder: PrecoderMatrix
    cfg: SchemeConfig


def choose_KL(M: int, L: int, Lp: int) -> int:
    """Smallest KL meeting KL + Lp >= ML (taken with equality)"""
    if M * L <= Lp:
        raise InfeasibleInstanceError(
            f"ML = {M * L} <= Lp = {Lp}: N too small to carry information for M={M}")
    return M * L - Lp


def constellation_size(P: float, epsilon: float, KL: int, Lp: int) -> int:
    """Q = max(1, floor(P^((1-eps) / (2 (KL + Lp + eps)))))"""
    if not P > 1:
        raise ConfigError(f"P must exceed 1, got {P}")
    if not 0 < epsilon < 1:
        raise ConfigError(f"epsilon must lie in (0, 1), got {epsilon}")
    exponent = (1.0 - epsilon) / (2.0 * (KL + Lp + epsilon))
    return max(1, int(math.floor(P ** exponent)))


def power_expected(cfg: SchemeConfig, params: ConstellationParams, precoder: PrecoderMatrix) -> float:
    """E||x||^2 = sigma^2 (||u||^2 ||alpha||^2 + ||V||_F^2) for uniform independent symbols"""
    gain = float(np.dot(cfg.u, cfg.u) * np.dot(cfg.alpha, cfg.alpha) + np.sum(precoder.V ** 2))
    return params.symbol_variance * gain


def constellation_params(P: float, epsilon: float, KL: int, Lp: int,
                         cfg: SchemeConfig, precoder: PrecoderMatrix) -> ConstellationParams:
    """Q from the power scaling law, a calibrated so that E||x||^2 = P"""
    Q = constellation_size(P, epsilon, KL, Lp)
    unit_power = power_expected(cfg, ConstellationParams(Q=Q, a=1.0, P=P), precoder)
    a = math.sqrt(P / unit_power)
    if a * Q > math.sqrt(P):
        logger.warning(f"constellation edge a*Q = {a * Q:.4g} exceeds sqrt(P) = {math.sqrt(P):.4g}")
    return ConstellationParams(Q=Q, a=a, P=float(P))


def draw_dithers(dims: SystemDims, KL: int, seed: SeedLike = None) -> Tuple[np.ndarray, np.ndarray]:
    """u (length M) and alpha (length KL), i.i.d. uniform on [0.5, 1.5]"""
    if KL < 1:
        raise ConfigError(f"KL must be >= 1, got {KL}")
    rng = as_generator(seed)
    u = rng.uniform(DITHER_LOW, DITHER_HIGH, size=dims.M)
    alpha = rng.uniform(DITHER_LOW, DITHER_HIGH, size=KL)
    return u, alpha


def build_link_instance(ch: ChannelSet, N: int, epsilon: float, dither_seed: SeedLike = None,
                        KL: Optional[int] = None, cap: Optional[int] = None,
                        dithers: Optional[Tuple[Sequence[float], Sequence[float]]] = None) -> LinkInstance:
    """Basis, precoder and dithers for a channel; KL defaults to choose_KL

    dithers pins (u, alpha) instead of drawing them from dither_seed.
    """
    dims = ch.dims
    basis = build_basis(dims, N, cap=cap)
    if KL is None:
        KL = choose_KL(dims.M, basis.L, basis.Lp)
    if dithers is None:
        u, alpha = draw_dithers(dims, KL, dither_seed)
    else:
        u, alpha = (np.asarray(d, dtype=float).ravel() for d in dithers)
        if u.size != dims.M:
            raise ConfigError(f"u has length {u.size}, expected M={dims.M}")
    cfg = SchemeConfig(N=basis.N, KL=KL, ML=basis.ML, Lp=basis.Lp, u=u, alpha=alpha, epsilon=epsilon)
    logger.info(f"Link instance M={dims.M} J1={dims.J1} J2={dims.J2} N={N}: KL={KL}, ML={basis.ML}, Lp={basis.Lp}")
    return LinkInstance(ch=ch, basis=basis, precoder=build_V(basis, ch), cfg=cfg)


def _check_symbols(name: str, b: np.ndarray, length: int, Q: int) -> np.ndarray:
    b = np.asarray(b)
    if b.shape[-1] != length:
        raise ValueError(f"{name} has length {b.shape[-1]}, expected {length}")
    if not np.all(b == np.round(b)):
        raise ValueError(f"{name} must hold integer symbols")
    if np.any(np.abs(b) > Q):
        raise ValueError(f"{name} has a symbol outside [-{Q}, {Q}]")
    return b.astype(np.int64)


def encode(b1: np.ndarray, b2: np.ndarray, params: ConstellationParams, cfg: SchemeConfig,
           precoder: PrecoderMatrix) -> TransmitFrame:
    b1 = _check_symbols("b1", b1, cfg.KL, params.Q)
    b2 = _check_symbols("b2", b2, cfg.ML, params.Q)
    x = cfg.u * (cfg.alpha @ (params.a * b1)) + precoder.V @ (params.a * b2)
    return TransmitFrame(b1=b1, b2=b2, x=x)


def encode_batch(B1: np.ndarray, B2: np.ndarray, params: ConstellationParams, cfg: SchemeConfig,
                 precoder: PrecoderMatrix) -> np.ndarray:
    """Rows of B1 (T x KL) and B2 (T x ML) to transmit vectors (T x M)"""
    B1 = _check_symbols("b1", B1, cfg.KL, params.Q)
    B2 = _check_symbols("b2", B2, cfg.ML, params.Q)
    return np.outer((params.a * B1) @ cfg.alpha, cfg.u) + (params.a * B2) @ precoder.V.T


def legit_effective_channel(j: int, ch: ChannelSet, basis: PrecoderBasis, cfg: SchemeConfig) -> EffectiveChannel:
    if not 0 <= j < ch.dims.J1:
        raise ValueError(f"legitimate receiver index {j} outside 0..{ch.dims.J1 - 1}")
    hhat = float(ch.H[j] @ cfg.u) * cfg.alpha
    htilde = evaluate_exponents(basis.A_exps, ch)
    return EffectiveChannel(hhat=hhat, htilde=htilde, selection=build_selection(j, basis),
                            side="legitimate", index=j)


def eaves_effective_channel(k: int, ch: ChannelSet, basis: PrecoderBasis, cfg: SchemeConfig) -> EffectiveChannel:
    if ch.dims.J2 == 0:
        raise InfeasibleInstanceError("no eavesdroppers in this channel set")
    if not 0 <= k < ch.dims.J2:
        raise ValueError(f"eavesdropper index {k} outside 0..{ch.dims.J2 - 1}")
    v = evaluate_exponents(basis.T_exps, ch)
    hhat = float(ch.G[k] @ cfg.u) * cfg.alpha
    return EffectiveChannel(hhat=hhat, htilde=np.kron(ch.G[k], v), selection=None,
                            side="eavesdropper", index=k)


def symbol_grid(ranges: Sequence[int]) -> np.ndarray:
    """All integer vectors with entry d in [-ranges[d], ranges[d]], lexicographic"""
    ranges = np.asarray(ranges, dtype=np.int64)
    if ranges.size == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grid = np.indices(tuple(2 * ranges + 1), dtype=np.int64).reshape(ranges.size, -1).T
    return grid - ranges[None, :]


def decode_search_size(eff: EffectiveChannel, params: ConstellationParams, cfg: SchemeConfig) -> int:
    """(2Q+1)^KL * (2MQ+1)^(active noise rows)"""
    active, _ = eff.coefficient_layout()
    return (2 * params.Q + 1) ** cfg.KL * (2 * cfg.M * params.Q + 1) ** int(active.size)


def ml_decode_batch(ys: np.ndarray, eff: EffectiveChannel, params: ConstellationParams,
                    cfg: SchemeConfig, cap: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Minimum-distance search over b1 and the aggregated noise coefficients for many outputs"""
    cap = config.caps.decode_cap if cap is None else cap
    size = decode_search_size(eff, params, cfg)
    if size > cap:
        raise CapExceededError(f"decoder search space {size} exceeds cap {cap}")

    ys = np.atleast_1d(np.asarray(ys, dtype=float)) / params.a
    active, multiplicity = eff.coefficient_layout()
    b1_grid = symbol_grid([params.Q] * cfg.KL)
    c_grid = symbol_grid(multiplicity * params.Q)

    s1 = b1_grid @ eff.hhat
    s2 = c_grid @ eff.htilde[active]
    order = np.argsort(s2, kind="stable")
    s2_sorted = s2[order]

    T = ys.size
    best_dist = np.full(T, np.inf)
    best_b1 = np.zeros(T, dtype=np.int64)
    best_c = np.zeros(T, dtype=np.int64)
    chunk = max(1, (1 << 22) // max(T, 1))
    for start in range(0, s1.size, chunk):
        targets = ys[:, None] - s1[None, start:start + chunk]
        pos = np.searchsorted(s2_sorted, targets)
        left = np.clip(pos - 1, 0, s2_sorted.size - 1)
        right = np.clip(pos, 0, s2_sorted.size - 1)
        d_left = np.abs(targets - s2_sorted[left])
        d_right = np.abs(targets - s2_sorted[right])
        nearest = np.where(d_left <= d_right, left, right)
        dist = np.minimum(d_left, d_right)
        col = np.argmin(dist, axis=1)
        rows = np.arange(T)
        improved = dist[rows, col] < best_dist
        best_dist = np.where(improved, dist[rows, col], best_dist)
        best_b1 = np.where(improved, start + col, best_b1)
        best_c = np.where(improved, nearest[rows, col], best_c)

    c_full = np.zeros((T, eff.htilde.size), dtype=np.int64)
    c_full[:, active] = c_grid[order[best_c]]
    return b1_grid[best_b1], c_full


def ml_decode(y: float, eff: EffectiveChannel, params: ConstellationParams,
              cfg: SchemeConfig, cap: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """(b1_hat, aggregated noise coefficients) for one received scalar"""
    b1_hat, c_hat = ml_decode_batch(np.array([y]), eff, params, cfg, cap=cap)
    return b1_hat[0], c_hat[0]


def _ser_block(instance: LinkInstance, effs: List[EffectiveChannel], params: ConstellationParams,
               n: int, rng: np.random.Generator, noise_on: bool, cap: Optional[int]) -> np.ndarray:
    cfg = instance.cfg
    B1 = rng.integers(-params.Q, params.Q + 1, size=(n, cfg.KL))
    B2 = rng.integers(-params.Q, params.Q + 1, size=(n, cfg.ML))
    X = encode_batch(B1, B2, params, cfg, instance.precoder)
    Y, _ = apply_channel_batch(instance.ch, X, noise_on=noise_on, seed=rng)
    errors = np.zeros(len(effs), dtype=np.int64)
    for j, eff in enumerate(effs):
        b1_hat, _ = ml_decode_batch(Y[:, j], eff, params, cfg, cap=cap)
        errors[j] = int(np.count_nonzero(b1_hat != B1))
    return errors


def run_ser_trials(instance: LinkInstance, P_dB_grid: Sequence[float], trials: int, seed: int,
                   noise_on: bool = True, threads: int = 1, block_size: Optional[int] = None,
                   cap: Optional[int] = None) -> pd.DataFrame:
    """Symbol error rate of b1 at every legitimate receiver over a grid of power budgets (dB)

    trials counts frames; errors counts wrong b1 symbols out of trials * KL.

    Trials are split into fixed-size blocks; block b at grid point p draws from
    seed_substream(seed, "ser", p, b), so the table does not depend on threads.
    """
    if trials < 1:
        raise ConfigError(f"trials must be >= 1, got {trials}")
    block_size = config.ser_block_size if block_size is None else block_size
    cfg = instance.cfg
    effs = [legit_effective_channel(j, instance.ch, instance.basis, cfg) for j in range(instance.ch.dims.J1)]
    blocks = [(b, min(block_size, trials - b * block_size)) for b in range(math.ceil(trials / block_size))]

    rows = []
    for p_idx, P_dB in enumerate(P_dB_grid):
        P = 10.0 ** (float(P_dB) / 10.0)
        params = constellation_params(P, cfg.epsilon, cfg.KL, cfg.Lp, cfg, instance.precoder)
        for eff in effs:
            size = decode_search_size(eff, params, cfg)
            if size > (config.caps.decode_cap if cap is None else cap):
                raise CapExceededError(f"decoder search space {size} exceeds cap at P_dB={P_dB}")

        def work(block):
            b, n = block
            return _ser_block(instance, effs, params, n, seed_substream(seed, "ser", p_idx, b),
                              noise_on, cap)

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                per_block = list(pool.map(work, blocks))
        else:
            per_block = [work(block) for block in blocks]
        errors = np.sum(per_block, axis=0)

        for j in range(len(effs)):
            rows.append({"P_dB": float(P_dB), "receiver": j, "trials": int(trials),
                         "errors": int(errors[j]), "ser": errors[j] / (trials * cfg.KL)})
        logger.info(f"SER at {P_dB} dB (Q={params.Q}, a={params.a:.4g}): "
                    + ", ".join(f"rx{j}={errors[j] / (trials * cfg.KL):.3g}" for j in range(len(effs))))

    return pd.DataFrame(rows, columns=["P_dB", "receiver", "trials", "errors", "ser"])
