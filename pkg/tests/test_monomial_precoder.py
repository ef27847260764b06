#!/usr/bin/env python3
"""
test_monomial_precoder.py - Exponent tables, precoder V and selection matrices
"""

import os
import sys

import numpy as np
import pytest

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from channel_model import ChannelSet, SystemDims, sample_channels
from errors import CapExceededError, ConfigError
from monomial_precoder import (Monomial, alignment_stats, build_basis, build_selection, build_V, cardinalities,
                               effective_noise_channel, eval_monomial, evaluate_exponents, export_exponents_text,
                               export_selection_text)

GRID = [(M, J1, N) for M in (2, 3) for J1 in (1, 2) for N in (1, 2, 3)]


class TestMonomial:

    def test_ordering_is_lexicographic(self):
        assert Monomial((0, 2)) < Monomial((1, 0)) < Monomial((1, 1))

    def test_negative_exponent_rejected(self):
        with pytest.raises(ValueError):
            Monomial((1, -1))

    def test_shifted(self):
        assert Monomial((0, 1)).shifted(0) == Monomial((1, 1))

    def test_eval(self):
        ch = ChannelSet(H=[[2.0, -3.0]], G=[], c=0.0)
        assert eval_monomial(Monomial((0, 0)), ch) == 1.0
        assert eval_monomial(Monomial((2, 1)), ch) == -12.0


class TestBuildBasis:
    """Enumeration of T and A"""

    @pytest.mark.parametrize("M,J1,N", GRID)
    def test_cardinalities(self, M, J1, N):
        basis = build_basis(SystemDims(M=M, J1=J1), N)
        assert (basis.L, basis.Lp) == (N ** (M * J1), (N + 1) ** (M * J1))
        assert (basis.L, basis.Lp) == cardinalities(M, J1, N)
        assert basis.ML == M * basis.L

    def test_big_integer_cardinalities_without_materializing(self):
        L, Lp = cardinalities(4, 2, 1000)
        assert L == 1000 ** 8
        assert Lp == 1001 ** 8

    def test_sets_are_sorted_and_bounded(self):
        basis = build_basis(SystemDims(M=2, J1=1), 3)
        T = basis.T_set
        assert T == sorted(T)
        assert len(set(T)) == basis.L
        assert basis.T_exps.max() == 2 and basis.A_exps.max() == 3
        assert basis.A_set == sorted(basis.A_set)

    def test_a_index_is_rank(self):
        basis = build_basis(SystemDims(M=2, J1=2), 2)
        assert np.array_equal(basis.a_index(basis.A_exps), np.arange(basis.Lp))

    def test_cap_exceeded(self):
        with pytest.raises(CapExceededError):
            build_basis(SystemDims(M=3, J1=2), 3, cap=1000)

    @pytest.mark.parametrize("N", [0, -1, 1.5, True])
    def test_invalid_N(self, N):
        with pytest.raises(ConfigError):
            build_basis(SystemDims(M=2, J1=1), N)


class TestAlignmentIdentity:
    """h_j^T V = h~^T T_j on random channels"""

    @pytest.mark.parametrize("M,J1,N", GRID)
    def test_identity_holds(self, M, J1, N):
        dims = SystemDims(M=M, J1=J1)
        basis = build_basis(dims, N)
        selections = [build_selection(j, basis) for j in range(J1)]
        for seed in range(17):
            ch = sample_channels(dims, seed=seed)
            V = build_V(basis, ch).V
            htilde = evaluate_exponents(basis.A_exps, ch)
            for j, sel in enumerate(selections):
                lhs = ch.H[j] @ V
                # h~^T T_j picks h~[row] for every column
                rhs = htilde[sel.row_of_col]
                scale = max(1.0, float(np.max(np.abs(lhs))))
                assert np.max(np.abs(lhs - rhs)) <= 1e-9 * scale

    def test_noise_channel_terms_match_row_of_hV(self):
        dims = SystemDims(M=2, J1=2)
        basis = build_basis(dims, 2)
        ch = sample_channels(dims, seed=4)
        terms = effective_noise_channel(1, basis, ch)
        assert np.allclose(terms.values, ch.H[1] @ build_V(basis, ch).V, rtol=1e-12)
        assert np.allclose(evaluate_exponents(terms.exponents, ch), terms.values, rtol=1e-12)

    def test_block_diagonal_V(self):
        dims = SystemDims(M=3, J1=1)
        basis = build_basis(dims, 2)
        pre = build_V(basis, sample_channels(dims, seed=2))
        assert pre.V.shape == (3, 3 * basis.L)
        assert np.array_equal(pre.V[1, basis.L:2 * basis.L], pre.v)
        assert np.count_nonzero(pre.V[0, basis.L:]) == 0


class TestSelectionStructure:

    @pytest.mark.parametrize("M,J1,N", GRID)
    def test_column_and_row_sums(self, M, J1, N):
        basis = build_basis(SystemDims(M=M, J1=J1), N)
        for j in range(J1):
            dense = build_selection(j, basis).to_dense()
            assert np.all(dense.sum(axis=0) == 1)
            assert np.all(dense.sum(axis=1) <= M)

    def test_apply_matches_dense_product(self):
        basis = build_basis(SystemDims(M=2, J1=1), 3)
        sel = build_selection(0, basis)
        b2 = np.random.default_rng(0).integers(-3, 4, size=(5, basis.ML))
        assert np.array_equal(sel.apply(b2), b2 @ sel.to_dense().T)
        assert np.array_equal(sel.apply(b2[0]), sel.to_dense() @ b2[0])

    def test_receiver_index_checked(self):
        basis = build_basis(SystemDims(M=2, J1=1), 1)
        with pytest.raises(ValueError):
            build_selection(1, basis)


class TestAlignmentCounting:

    def test_fourteen_versus_eighteen(self):
        stats = alignment_stats(build_basis(SystemDims(M=2, J1=1), 3))
        assert stats.legit_distinct == (14,)
        assert stats.eaves_generators == 18

    def test_every_receiver_sees_fewer_generators(self):
        stats = alignment_stats(build_basis(SystemDims(M=2, J1=2), 2))
        assert len(stats.legit_distinct) == 2
        assert all(d < stats.eaves_generators for d in stats.legit_distinct)

    def test_compression_grows_with_N(self):
        # 2 N^2 generators against 2 N^2 - (N - 1)^2 distinct rows
        ratios = []
        for N in range(1, 7):
            stats = alignment_stats(build_basis(SystemDims(M=2, J1=1), N))
            ratios.append(stats.eaves_generators / stats.legit_distinct[0])
        assert ratios[0] == 1.0
        assert all(later >= earlier for earlier, later in zip(ratios, ratios[1:]))
        assert ratios[-1] == pytest.approx(72 / 47)
        assert all(r < 2 for r in ratios)


class TestExports:

    def test_exponent_and_selection_text(self, tmp_path):
        basis = build_basis(SystemDims(M=2, J1=1), 2)
        export_exponents_text(basis, tmp_path / "T.txt")
        lines = (tmp_path / "T.txt").read_text().splitlines()
        assert lines == ["0 0", "0 1", "1 0", "1 1"]

        sel = build_selection(0, basis)
        export_selection_text(sel, tmp_path / "sel.txt")
        pairs = [tuple(int(v) for v in line.split()) for line in (tmp_path / "sel.txt").read_text().splitlines()]
        assert len(pairs) == basis.ML
        assert pairs[0] == (0, int(sel.row_of_col[0]))
