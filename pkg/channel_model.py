#!/usr/bin/env python3
"""
channel_model.py - Compound multi-antenna wiretap channel

One transmitter with M antennas, J1 single-antenna legitimate receivers and
J2 single-antenna eavesdroppers:

    y_j = h_j^T x + v_j,    z_k = g_k^T x + w_k,    v, w ~ N(0, 1) i.i.d.

The transmitter knows every h_j but only the bound c >= max_k ||g_k||^2.
"""

import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from errors import ConfigError
from seed_streams import SeedLike, as_generator

logger = logging.getLogger(__name__)

STANDARD_NORMAL = "standard-normal"
_UNIFORM_RE = re.compile(r"^uniform\(\s*([^,\s]+)\s*,\s*([^)\s]+)\s*\)$")


@dataclass(frozen=True)
class SystemDims:
    """Antenna and receiver counts"""
    M: int
    J1: int
    J2: int = 0

    def __post_init__(self):
        for name, value, low in (("M", self.M, 1), ("J1", self.J1, 1), ("J2", self.J2, 0)):
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ConfigError(f"{name} must be an integer, got {value!r}")
            if value < low:
                raise ConfigError(f"{name} must be >= {low}, got {value}")

    @property
    def n_gains(self) -> int:
        """Number of legitimate gains h_ji, i.e. the exponent-vector length"""
        return self.M * self.J1


@dataclass(frozen=True)
class ChannelDistribution:
    """Continuous distribution the channel gains are drawn from"""
    kind: str = "normal"
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if self.kind not in ("normal", "uniform"):
            raise ConfigError(f"Unsupported channel distribution: {self.kind!r}")
        if self.kind == "uniform":
            if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
                raise ConfigError("uniform bounds must be finite")
            if not self.lo < self.hi:
                raise ConfigError(f"degenerate uniform({self.lo},{self.hi}): need lo < hi")

    @classmethod
    def parse(cls, text: str) -> "ChannelDistribution":
        """Parse 'standard-normal' or 'uniform(lo,hi)'"""
        cleaned = text.strip().lower()
        if cleaned in (STANDARD_NORMAL, "normal"):
            return cls()
        match = _UNIFORM_RE.match(cleaned)
        if not match:
            raise ConfigError(f"Unrecognized channel distribution: {text!r}")
        try:
            lo, hi = float(match.group(1)), float(match.group(2))
        except ValueError:
            raise ConfigError(f"Malformed uniform bounds in {text!r}")
        return cls(kind="uniform", lo=lo, hi=hi)

    def draw(self, rng: np.random.Generator, shape: Tuple[int, ...]) -> np.ndarray:
        if self.kind == "normal":
            return rng.standard_normal(shape)
        return rng.uniform(self.lo, self.hi, size=shape)

    def describe(self) -> str:
        if self.kind == "normal":
            return STANDARD_NORMAL
        return f"uniform({_exact(self.lo)},{_exact(self.hi)})"


def _exact(v: float) -> str:
    short = f"{v:g}"
    return short if float(short) == v else repr(v)


@dataclass(frozen=True)
class ChannelSet:
    """Legitimate gains H (J1 x M), eavesdropper gains G (J2 x M) and the bound c"""
    H: np.ndarray
    G: np.ndarray
    c: float

    def __post_init__(self):
        H = np.array(self.H, dtype=float, ndmin=2)
        G = np.array(self.G, dtype=float)
        if G.size == 0:
            G = np.zeros((0, H.shape[1]))
        G = np.atleast_2d(G)
        if H.ndim != 2 or H.shape[0] < 1 or H.shape[1] < 1:
            raise ValueError(f"H must be a non-empty J1 x M matrix, got shape {H.shape}")
        if G.shape[1] != H.shape[1]:
            raise ValueError(f"G has {G.shape[1]} columns but H has {H.shape[1]}")
        if not (np.all(np.isfinite(H)) and np.all(np.isfinite(G))):
            raise ValueError("channel gains must be finite")
        if np.any(H == 0) or np.any(G == 0):
            raise ValueError("channel gains must be nonzero")
        if np.unique(H).size != H.size:
            raise ValueError("legitimate gains must be pairwise distinct")
        c = float(self.c)
        if c < 0 or not np.isfinite(c):
            raise ValueError(f"c must be a finite nonnegative bound, got {c}")
        if G.shape[0] and eaves_norm_bound(G) > c:
            raise ValueError(f"eavesdropper norm bound violated: max ||g_k||^2 = {eaves_norm_bound(G)} > c = {c}")
        H.setflags(write=False)
        G.setflags(write=False)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "c", c)

    @property
    def dims(self) -> SystemDims:
        return SystemDims(M=self.H.shape[1], J1=self.H.shape[0], J2=self.G.shape[0])


@dataclass(frozen=True)
class LinkOutputs:
    """Receiver outputs y (length J1) and eavesdropper outputs z (length J2)"""
    y: np.ndarray
    z: np.ndarray


def eaves_norm_bound(ch: Union[ChannelSet, np.ndarray]) -> float:
    """max_k ||g_k||^2, or 0 when there are no eavesdroppers"""
    G = ch.G if isinstance(ch, ChannelSet) else np.atleast_2d(np.asarray(ch, dtype=float))
    if G.size == 0:
        return 0.0
    return float(np.max(np.sum(G * G, axis=1)))


def sample_channels(dims: SystemDims, seed: SeedLike = None,
                    dist: Union[ChannelDistribution, str, None] = None) -> ChannelSet:
    """Draw i.i.d. gains from a continuous distribution; c is set to the exact norm bound"""
    if dist is None:
        dist = ChannelDistribution()
    elif isinstance(dist, str):
        dist = ChannelDistribution.parse(dist)

    rng = as_generator(seed)
    H = dist.draw(rng, (dims.J1, dims.M))
    G = dist.draw(rng, (dims.J2, dims.M))
    c = eaves_norm_bound(G) if dims.J2 else 0.0

    logger.debug(f"Sampled channels M={dims.M} J1={dims.J1} J2={dims.J2} from {dist.describe()}, c={c:.6g}")
    try:
        return ChannelSet(H=H, G=G, c=c)
    except ValueError as e:
        raise ConfigError(f"{dist.describe()} produced an unusable channel: {e}")


def apply_channel_batch(ch: ChannelSet, X: np.ndarray, noise_on: bool = True,
                        seed: SeedLike = None) -> Tuple[np.ndarray, np.ndarray]:
    """Pass T transmit vectors (rows of X) through the channel; returns (Y: T x J1, Z: T x J2)"""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    M = ch.H.shape[1]
    if X.shape[1] != M:
        raise ValueError(f"transmit vectors have length {X.shape[1]}, expected M={M}")

    Y = X @ ch.H.T
    Z = X @ ch.G.T
    if noise_on:
        rng = as_generator(seed)
        Y = Y + rng.standard_normal(Y.shape)
        Z = Z + rng.standard_normal(Z.shape)
    return Y, Z


def apply_channel(ch: ChannelSet, x: np.ndarray, noise_on: bool = True,
                  seed: SeedLike = None) -> LinkOutputs:
    """y_j = h_j^T x + v_j and z_k = g_k^T x + w_k for a single transmit vector"""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"x must be a vector, got shape {x.shape}")
    Y, Z = apply_channel_batch(ch, x[None, :], noise_on=noise_on, seed=seed)
    return LinkOutputs(y=Y[0], z=Z[0])


def save_channel_set(ch: ChannelSet, path: Union[str, Path]) -> None:
    """Write 'M J1 J2 c' then H rows then G rows, space separated, full precision"""
    p = Path(path)
    dims = ch.dims
    lines = [f"{dims.M} {dims.J1} {dims.J2} {ch.c!r}"]
    for row in np.vstack([ch.H, ch.G]):
        lines.append(" ".join(repr(float(v)) for v in row))
    tmp = p.with_suffix(p.suffix + ".tmp")
    tmp.write_text("\n".join(lines) + "\n")
    tmp.replace(p)


def load_channel_set(path: Union[str, Path]) -> ChannelSet:
    """Inverse of save_channel_set"""
    p = Path(path)
    if not p.exists():
        logger.error(f"Channel file not found: {p}")
        raise FileNotFoundError(str(p))

    rows = [line.split() for line in p.read_text().splitlines() if line.strip()]
    try:
        M, J1, J2 = (int(v) for v in rows[0][:3])
        c = float(rows[0][3])
        body = np.array([[float(v) for v in row] for row in rows[1:]], dtype=float).reshape(J1 + J2, M)
    except (IndexError, ValueError) as e:
        raise ConfigError(f"Malformed channel file {p}: {e}")
    try:
        return ChannelSet(H=body[:J1], G=body[J1:], c=c)
    except ValueError as e:
        raise ConfigError(f"Invalid channel file {p}: {e}")
