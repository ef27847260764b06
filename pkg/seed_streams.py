#!/usr/bin/env python3
"""
seed_streams.py - Deterministic RNG substreams and SHA-256 digests

Substreams are split from a master seed by hashing a structured label list:

    key    = "u64:<master>|<type>:<label>|<type>:<label>|..."
    digest = SHA-256(key)
    stream = Generator(PCG64(SeedSequence(entropy=digest as 8 little-endian uint32 words)))

Labels are type-tagged so ("1",) and (1,) never share a key. Distinct label
lists give independent streams up to SHA-256 collisions.
"""

import hashlib
import json
import logging
from typing import Any, Dict, Optional, Union

import numpy as np

logger = logging.getLogger(__name__)

MAX_SEED = 2**64 - 1

SeedLike = Union[None, int, np.random.SeedSequence, np.random.Generator]


def _encode_label(label: Any) -> str:
    if isinstance(label, bool):
        return f"bool:{int(label)}"
    if isinstance(label, (int, np.integer)):
        return f"int:{int(label)}"
    if isinstance(label, str):
        return f"str:{label}"
    raise TypeError(f"Unsupported substream label type: {type(label).__name__}")


def stream_key(master_seed: int, *labels: Any) -> str:
    """Canonical text key for (master seed, labels)"""
    if not 0 <= int(master_seed) <= MAX_SEED:
        raise ValueError(f"master seed must fit in an unsigned 64-bit integer, got {master_seed}")
    parts = [f"u64:{int(master_seed)}"] + [_encode_label(label) for label in labels]
    return "|".join(parts)


def seed_substream(master_seed: int, *labels: Any) -> np.random.Generator:
    """Derive an independent generator from a master seed and a label list"""
    digest = hashlib.sha256(stream_key(master_seed, *labels).encode("utf-8")).digest()
    words = np.frombuffer(digest, dtype="<u4").tolist()
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=words)))


def as_generator(seed: SeedLike) -> np.random.Generator:
    """Coerce an int seed, SeedSequence or Generator into a Generator"""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.default_rng(seed)


def scenario_digest(payload: Dict[str, Any]) -> str:
    """SHA-256 of the canonical JSON form of a scenario"""
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def compute_file_hash(file_path: str) -> Optional[str]:
    """Compute SHA-256 hash of a file"""
    try:
        hash_sha256 = hashlib.sha256()
        with open(file_path, "rb") as f:
            for chunk in iter(lambda: f.read(4096), b""):
                hash_sha256.update(chunk)

        file_hash = hash_sha256.hexdigest()
        logger.debug(f"Computed hash for {file_path}: {file_hash[:16]}...")
        return file_hash

    except OSError as e:
        logger.error(f"Failed to compute hash for {file_path}: {e}")
        return None
