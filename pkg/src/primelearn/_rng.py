"""Named, reproducible random sub-streams derived from one integer seed."""

from __future__ import annotations

import hashlib
import random

import numpy as np


def derive_seed(seed: int, *names: object) -> int:
    """256-bit integer determined by ``seed`` and the path of names."""
    key = repr((int(seed), *[str(n) for n in names])).encode()
    return int.from_bytes(hashlib.sha256(key).digest(), "big")


def substream(seed: int, *names: object) -> random.Random:
    return random.Random(derive_seed(seed, *names))


def np_substream(seed: int, *names: object) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, *names))
