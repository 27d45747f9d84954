"""Counter-based random streams keyed by (seed, kind, index)."""

from __future__ import annotations

import hashlib

import numpy as np


def stream_key(seed: int, kind: str, index: int) -> int:
    digest = hashlib.sha256(f"{int(seed)}|{kind}|{int(index)}".encode()).digest()
    return int.from_bytes(digest[:16], "little")


def stream(seed: int, kind: str, index: int = 0) -> np.random.Generator:
    """Independent Philox stream; identical for a given key regardless of call order."""
    return np.random.Generator(np.random.Philox(key=stream_key(seed, kind, index)))
