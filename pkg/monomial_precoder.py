#!/usr/bin/env python3
"""
monomial_precoder.py - Exact construction of the noise-alignment precoder

Every element of the precoding sets is a monomial prod_{j,i} h_ji^alpha_ji and
is represented by its integer exponent vector, flattened j-major then i
(coordinate j*M + i). T holds the exponents in {0..N-1}, A those in {0..N};
both are kept in lexicographic order. Alignment (the selection matrices T_j)
is computed on exponent vectors only, never by comparing evaluated floats.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, NamedTuple, Optional, Tuple, Union

import numpy as np

from channel_model import ChannelSet, SystemDims
from config import config
from errors import CapExceededError, ConfigError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class Monomial:
    """Exponent vector of prod h_ji^alpha_ji; ordering is lexicographic on the flattened vector"""
    exponents: Tuple[int, ...]

    def __post_init__(self):
        exps = tuple(int(e) for e in self.exponents)
        if any(e < 0 for e in exps):
            raise ValueError(f"negative exponent in {exps}")
        object.__setattr__(self, "exponents", exps)

    def shifted(self, coord: int) -> "Monomial":
        """Multiply by the gain at flattened coordinate coord"""
        exps = list(self.exponents)
        exps[coord] += 1
        return Monomial(tuple(exps))


def cardinalities(M: int, J1: int, N: int) -> Tuple[int, int]:
    """Exact (L, Lp) = (N^(M J1), (N+1)^(M J1)) as Python integers, nothing materialized"""
    D = M * J1
    return N ** D, (N + 1) ** D


def _box(D: int, base: int) -> np.ndarray:
    # C-order indices enumerate {0..base-1}^D lexicographically
    return np.indices((base,) * D, dtype=np.int64).reshape(D, -1).T.copy()


@dataclass(frozen=True)
class PrecoderBasis:
    """Exponent tables of T (L x D) and A (Lp x D)"""
    dims: SystemDims
    N: int
    T_exps: np.ndarray
    A_exps: np.ndarray

    @property
    def L(self) -> int:
        return self.T_exps.shape[0]

    @property
    def Lp(self) -> int:
        return self.A_exps.shape[0]

    @property
    def ML(self) -> int:
        return self.dims.M * self.L

    @property
    def T_set(self) -> List[Monomial]:
        return [Monomial(tuple(row)) for row in self.T_exps.tolist()]

    @property
    def A_set(self) -> List[Monomial]:
        return [Monomial(tuple(row)) for row in self.A_exps.tolist()]

    def a_index(self, exps: np.ndarray) -> np.ndarray:
        """Row of A holding each exponent vector (mixed-radix rank, base N+1)"""
        exps = np.atleast_2d(np.asarray(exps, dtype=np.int64))
        if np.any(exps < 0) or np.any(exps > self.N):
            raise AssertionError("exponent vector outside the A box")
        D = exps.shape[1]
        weights = (self.N + 1) ** np.arange(D - 1, -1, -1, dtype=np.int64)
        return exps @ weights


def build_basis(dims: SystemDims, N: int, cap: Optional[int] = None) -> PrecoderBasis:
    """Enumerate T and A in canonical order; refuses instances with Lp above the cap"""
    if isinstance(N, bool) or not isinstance(N, (int, np.integer)) or N < 1:
        raise ConfigError(f"N must be a positive integer, got {N!r}")
    cap = config.caps.basis_cap if cap is None else cap

    L, Lp = cardinalities(dims.M, dims.J1, int(N))
    if Lp > cap:
        raise CapExceededError(
            f"basis too large to materialize: Lp = (N+1)^(M*J1) = {Lp} exceeds cap {cap} "
            f"(M={dims.M}, J1={dims.J1}, N={N})")

    D = dims.n_gains
    T_exps = _box(D, int(N))
    A_exps = _box(D, int(N) + 1)
    T_exps.setflags(write=False)
    A_exps.setflags(write=False)

    logger.info(f"Built precoder basis M={dims.M} J1={dims.J1} N={N}: L={L}, Lp={Lp}")
    return PrecoderBasis(dims=dims, N=int(N), T_exps=T_exps, A_exps=A_exps)


def eval_monomial(m: Monomial, ch: ChannelSet) -> float:
    """prod_{j,i} h_ji^alpha_ji; the all-zeros monomial is 1"""
    h = ch.H.ravel()
    if len(m.exponents) != h.size:
        raise ValueError(f"monomial has {len(m.exponents)} exponents, channel has {h.size} gains")
    return float(np.prod(h ** np.asarray(m.exponents, dtype=np.int64)))


def evaluate_exponents(exps: np.ndarray, ch: ChannelSet) -> np.ndarray:
    """Vectorized eval_monomial over the rows of an exponent table"""
    h = ch.H.ravel()
    return np.prod(h[None, :] ** exps, axis=1)


@dataclass(frozen=True)
class PrecoderMatrix:
    """v (evaluated T set) and the block-diagonal V = diag(v^T, ..., v^T), M x ML"""
    v: np.ndarray
    V: np.ndarray


def build_V(basis: PrecoderBasis, ch: ChannelSet) -> PrecoderMatrix:
    if ch.dims.M != basis.dims.M or ch.dims.J1 != basis.dims.J1:
        raise ValueError(f"channel dims {ch.dims} do not match basis dims {basis.dims}")
    v = evaluate_exponents(basis.T_exps, ch)
    V = np.kron(np.eye(basis.dims.M), v[None, :])
    v.setflags(write=False)
    V.setflags(write=False)
    return PrecoderMatrix(v=v, V=V)


class NoiseChannelTerms(NamedTuple):
    values: np.ndarray
    exponents: np.ndarray


def _shifted_exponents(j: int, basis: PrecoderBasis) -> np.ndarray:
    # column i*L + l holds T[l] + e_(j,i)
    M, L = basis.dims.M, basis.L
    exps = np.tile(basis.T_exps, (M, 1))
    exps[np.arange(M * L), j * M + np.repeat(np.arange(M), L)] += 1
    return exps


def _check_receiver(j: int, basis: PrecoderBasis) -> None:
    if not 0 <= j < basis.dims.J1:
        raise ValueError(f"receiver index {j} outside 0..{basis.dims.J1 - 1}")


def effective_noise_channel(j: int, basis: PrecoderBasis, ch: ChannelSet) -> NoiseChannelTerms:
    """h_j^T V = [h_j1 v^T, ..., h_jM v^T] with the exponent vector of every entry"""
    _check_receiver(j, basis)
    v = evaluate_exponents(basis.T_exps, ch)
    values = np.repeat(ch.H[j], basis.L) * np.tile(v, basis.dims.M)
    return NoiseChannelTerms(values=values, exponents=_shifted_exponents(j, basis))


@dataclass(frozen=True)
class SelectionMatrix:
    """0/1 matrix (Lp x ML) stored as the row index of each column's single one"""
    n_rows: int
    row_of_col: np.ndarray
    M: int

    @property
    def n_cols(self) -> int:
        return self.row_of_col.size

    def column_sums(self) -> np.ndarray:
        return np.ones(self.n_cols, dtype=np.int64)

    def row_sums(self) -> np.ndarray:
        return np.bincount(self.row_of_col, minlength=self.n_rows)

    def active_rows(self) -> np.ndarray:
        """Rows with a nonzero sum, ascending"""
        return np.flatnonzero(self.row_sums())

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n_rows, self.n_cols), dtype=np.int64)
        dense[self.row_of_col, np.arange(self.n_cols)] = 1
        return dense

    def apply(self, b2: np.ndarray) -> np.ndarray:
        """T_j b2 for one vector (ML,) or a batch (T, ML)"""
        b2 = np.asarray(b2)
        single = b2.ndim == 1
        B = np.atleast_2d(b2)
        out = np.zeros((B.shape[0], self.n_rows), dtype=B.dtype)
        L = self.n_cols // self.M
        # within one antenna block the map l -> row is injective, so fancy-index adds are safe
        for i in range(self.M):
            out[:, self.row_of_col[i * L:(i + 1) * L]] += B[:, i * L:(i + 1) * L]
        return out[0] if single else out


def build_selection(j: int, basis: PrecoderBasis) -> SelectionMatrix:
    """T_j with h_j^T V = h~^T T_j, found by exact exponent lookup in A"""
    _check_receiver(j, basis)
    exps = _shifted_exponents(j, basis)
    rows = basis.a_index(exps)
    if not np.array_equal(basis.A_exps[rows], exps):
        raise AssertionError(f"selection lookup miss for receiver {j}")
    rows.setflags(write=False)
    return SelectionMatrix(n_rows=basis.Lp, row_of_col=rows, M=basis.dims.M)


@dataclass(frozen=True)
class AlignmentStats:
    legit_distinct: Tuple[int, ...]
    eaves_generators: int


def alignment_stats(basis: PrecoderBasis, dims: Optional[SystemDims] = None) -> AlignmentStats:
    """Distinct noise generators seen by each legitimate receiver versus M*L at an eavesdropper"""
    dims = basis.dims if dims is None else dims
    distinct = tuple(int(build_selection(j, basis).active_rows().size) for j in range(dims.J1))
    return AlignmentStats(legit_distinct=distinct, eaves_generators=dims.M * basis.L)


def export_exponents_text(exps: Union[np.ndarray, PrecoderBasis], path: Union[str, Path]) -> None:
    """One exponent vector per line, space separated (T set when given a basis)"""
    table = exps.T_exps if isinstance(exps, PrecoderBasis) else np.asarray(exps)
    lines = [" ".join(str(int(e)) for e in row) for row in table]
    Path(path).write_text("\n".join(lines) + "\n")


def export_selection_text(sel: SelectionMatrix, path: Union[str, Path]) -> None:
    """One 'col row' pair per line"""
    lines = [f"{col} {int(row)}" for col, row in enumerate(sel.row_of_col)]
    Path(path).write_text("\n".join(lines) + "\n")
