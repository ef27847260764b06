#!/usr/bin/env python3
"""
test_seed_streams.py - Substream splitting and digests
"""

import os
import sys

import numpy as np
import pytest

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from seed_streams import as_generator, compute_file_hash, scenario_digest, seed_substream, stream_key


class TestSeedSubstream:

    def test_same_labels_same_stream(self):
        a = seed_substream(42, "ser", 0, 3).random(8)
        b = seed_substream(42, "ser", 0, 3).random(8)
        assert np.array_equal(a, b)

    def test_trial_indices_diverge(self):
        first = np.array([seed_substream(7, "trial", i).integers(0, 2**32, size=4) for i in range(10_000)])
        assert np.unique(first, axis=0).shape[0] == 10_000

    def test_label_types_are_distinguished(self):
        assert stream_key(1, "1") != stream_key(1, 1)
        assert stream_key(1, True) != stream_key(1, 1)

    def test_key_format(self):
        assert stream_key(5, "channel") == "u64:5|str:channel"
        assert stream_key(5, "ser", 2, 0) == "u64:5|str:ser|int:2|int:0"

    def test_seed_range(self):
        seed_substream(2**64 - 1, "channel")
        with pytest.raises(ValueError):
            stream_key(2**64, "channel")
        with pytest.raises(ValueError):
            stream_key(-1)

    def test_unsupported_label(self):
        with pytest.raises(TypeError):
            stream_key(0, 1.5)

    def test_channel_and_dither_streams_differ(self):
        assert not np.array_equal(seed_substream(0, "channel").random(4), seed_substream(0, "dithers").random(4))


class TestHelpers:

    def test_as_generator_passthrough(self):
        rng = np.random.default_rng(1)
        assert as_generator(rng) is rng
        assert as_generator(3).random() == np.random.default_rng(3).random()

    def test_digest_ignores_key_order(self):
        assert scenario_digest({"a": 1, "b": [1, 2]}) == scenario_digest({"b": [1, 2], "a": 1})
        assert scenario_digest({"a": 1}) != scenario_digest({"a": 2})

    def test_file_hash(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text("P_dB\n20\n")
        assert len(compute_file_hash(str(path))) == 64
        assert compute_file_hash(str(tmp_path / "absent")) is None
