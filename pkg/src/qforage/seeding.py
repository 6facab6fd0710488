"""Deterministic named random streams derived from one root seed.

Every run owns a single integer root seed. Each consumer (corpus generation,
environment shuffles, policy sampling, parameter init) asks for a stream by
name; the child seed is a hash of the root seed and the stream name, so
streams are independent, reproducible, and insensitive to the order in which
other streams are created.
"""

from __future__ import annotations

import hashlib

import numpy as np


def stream_seed(root_seed: int, name: str) -> int:
    """Child seed for the named stream, stable across runs and platforms."""
    digest = hashlib.blake2b(f"{root_seed}:{name}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def stream_rng(root_seed: int, name: str) -> np.random.Generator:
    """Fresh PCG64 generator for the named stream."""
    return np.random.default_rng(stream_seed(root_seed, name))
