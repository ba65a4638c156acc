"""Named random sub-streams derived from a single seed.

Each consumer (candidate sampling, perturbations, tubes, basis search, ...)
draws from its own stream so that adding a consumer never shifts another.
"""
from __future__ import annotations

import zlib

import numpy as np

STREAMS = ("candidates", "perturbations", "tubes", "basis", "witness", "data")


def stream(seed: int, name: str, *index: int) -> np.random.Generator:
    """Generator for sub-stream ``name`` (optionally further indexed)."""
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.default_rng([int(seed), key, *[int(i) for i in index]])
