#!/usr/bin/env python3
"""
test_channel_model.py - Channel sampling, AWGN application and channel files
"""

import os
import sys

import numpy as np
import pytest

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from channel_model import (ChannelDistribution, ChannelSet, SystemDims, apply_channel, apply_channel_batch,
                           eaves_norm_bound, load_channel_set, sample_channels, save_channel_set)
from errors import ConfigError


class TestSystemDims:
    """Dimension validation"""

    def test_valid_dims(self):
        dims = SystemDims(M=3, J1=2, J2=1)
        assert dims.n_gains == 6

    def test_eavesdroppers_default_to_zero(self):
        assert SystemDims(M=2, J1=1).J2 == 0

    @pytest.mark.parametrize("kwargs", [{"M": 0, "J1": 1}, {"M": 2, "J1": 0}, {"M": 2, "J1": 1, "J2": -1}])
    def test_rejects_out_of_range(self, kwargs):
        with pytest.raises(ConfigError):
            SystemDims(**kwargs)


class TestChannelDistribution:

    def test_parse_standard_normal(self):
        assert ChannelDistribution.parse("standard-normal").kind == "normal"

    def test_parse_uniform(self):
        dist = ChannelDistribution.parse("uniform(-2, 3)")
        assert (dist.kind, dist.lo, dist.hi) == ("uniform", -2.0, 3.0)
        assert dist.describe() == "uniform(-2,3)"

    def test_describe_keeps_full_precision(self):
        dist = ChannelDistribution.parse("uniform(1,1.0000000000000002)")
        assert dist.describe() == "uniform(1,1.0000000000000002)"
        assert ChannelDistribution.parse(dist.describe()) == dist

    def test_zero_width_uniform_rejected(self):
        with pytest.raises(ConfigError):
            ChannelDistribution.parse("uniform(1,1)")

    def test_unknown_distribution_rejected(self):
        with pytest.raises(ConfigError):
            ChannelDistribution.parse("rayleigh")


class TestSampleChannels:
    """Sampling contract"""

    def test_same_seed_reproduces_bit_identical_channels(self):
        dims = SystemDims(M=2, J1=1, J2=1)
        a = sample_channels(dims, seed=42)
        b = sample_channels(dims, seed=42)
        assert a.H.shape == (1, 2) and a.G.shape == (1, 2)
        assert np.array_equal(a.H, b.H) and np.array_equal(a.G, b.G)
        assert a.c == b.c

    def test_c_is_exact_norm_bound(self):
        ch = sample_channels(SystemDims(M=2, J1=1, J2=1), seed=42)
        assert ch.c == float(np.sum(ch.G[0] ** 2))

    def test_no_eavesdroppers_gives_zero_bound(self):
        ch = sample_channels(SystemDims(M=2, J1=2, J2=0), seed=3)
        assert ch.G.shape == (0, 2)
        assert ch.c == 0.0

    def test_entries_pairwise_distinct(self):
        ch = sample_channels(SystemDims(M=3, J1=2, J2=2), seed=7)
        entries = np.concatenate([ch.H.ravel(), ch.G.ravel()])
        assert entries.size == 12
        assert np.unique(entries).size == 12

    def test_uniform_draws_stay_in_range(self):
        ch = sample_channels(SystemDims(M=3, J1=2, J2=2), seed=1, dist="uniform(0.5,2)")
        entries = np.concatenate([ch.H.ravel(), ch.G.ravel()])
        assert np.all((entries >= 0.5) & (entries < 2.0))


    def test_unusable_draw_is_config_error(self):
        # two representable values for six distinct gains
        with pytest.raises(ConfigError, match="unusable channel"):
            sample_channels(SystemDims(M=3, J1=2), seed=1, dist="uniform(1,1.0000000000000002)")


class TestChannelSetValidation:

    def test_norm_bound_violation_rejected(self):
        with pytest.raises(ValueError):
            ChannelSet(H=[[1.0, 2.0]], G=[[3.0, 4.0]], c=24.0)

    def test_zero_gain_rejected(self):
        with pytest.raises(ValueError):
            ChannelSet(H=[[1.0, 0.0]], G=[], c=0.0)

    def test_repeated_legitimate_gain_rejected(self):
        with pytest.raises(ValueError):
            ChannelSet(H=[[1.5, 1.5]], G=[], c=0.0)

    def test_arrays_are_read_only(self):
        ch = ChannelSet(H=[[1.0, 2.0]], G=[[0.5, 0.25]], c=1.0)
        with pytest.raises(ValueError):
            ch.H[0, 0] = 3.0

    def test_norm_bound_helper(self):
        assert eaves_norm_bound(np.array([[1.0, 2.0], [2.0, 2.0]])) == 8.0
        assert eaves_norm_bound(np.zeros((0, 2))) == 0.0


class TestApplyChannel:
    """y = H x + v, z = G x + w"""

    def setup_method(self):
        self.ch = ChannelSet(H=[[1.0, 2.0], [-0.5, 3.0]], G=[[0.25, -1.0]], c=2.0)

    def test_zero_input_without_noise(self):
        out = apply_channel(self.ch, np.zeros(2), noise_on=False)
        assert np.array_equal(out.y, np.zeros(2))
        assert np.array_equal(out.z, np.zeros(1))

    def test_noiseless_outputs_are_inner_products(self):
        out = apply_channel(self.ch, np.array([1.0, -1.0]), noise_on=False)
        assert out.y.tolist() == [-1.0, -3.5]
        assert out.z.tolist() == [1.25]

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            apply_channel(self.ch, np.ones(3))

    def test_noiseless_channel_is_linear(self):
        x1, x2 = np.array([0.3, -1.7]), np.array([2.5, 0.4])
        combined = apply_channel(self.ch, 2.0 * x1 - 3.0 * x2, noise_on=False)
        a = apply_channel(self.ch, x1, noise_on=False)
        b = apply_channel(self.ch, x2, noise_on=False)
        assert combined.y == pytest.approx(2.0 * a.y - 3.0 * b.y, abs=1e-9)
        assert combined.z == pytest.approx(2.0 * a.z - 3.0 * b.z, abs=1e-9)

    def test_noise_is_unit_variance(self):
        Y, Z = apply_channel_batch(self.ch, np.zeros((100_000, 2)), noise_on=True, seed=11)
        assert Y.shape == (100_000, 2) and Z.shape == (100_000, 1)
        assert np.var(Y) == pytest.approx(1.0, rel=0.02)
        assert np.var(Z) == pytest.approx(1.0, rel=0.02)
        assert np.mean(Z) == pytest.approx(0.0, abs=0.02)

    def test_seeded_noise_reproducible(self):
        a = apply_channel(self.ch, np.ones(2), seed=5)
        b = apply_channel(self.ch, np.ones(2), seed=5)
        assert np.array_equal(a.y, b.y) and np.array_equal(a.z, b.z)


class TestChannelFile:

    def test_save_then_load_preserves_gains(self, tmp_path):
        ch = sample_channels(SystemDims(M=3, J1=2, J2=1), seed=9)
        path = tmp_path / "channel.txt"
        save_channel_set(ch, path)
        assert path.read_text().splitlines()[0].split()[:3] == ["3", "2", "1"]
        loaded = load_channel_set(path)
        assert np.array_equal(loaded.H, ch.H)
        assert np.array_equal(loaded.G, ch.G)
        assert loaded.c == ch.c

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_channel_set(tmp_path / "absent.txt")

    def test_invalid_gains_in_file(self, tmp_path):
        path = tmp_path / "zero.txt"
        path.write_text("2 1 0 0.0\n0.0 5.7\n")
        with pytest.raises(ConfigError, match="nonzero"):
            load_channel_set(path)

    def test_malformed_file(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("2 1 0 0.0\n1.0\n")
        with pytest.raises(ConfigError):
            load_channel_set(path)
