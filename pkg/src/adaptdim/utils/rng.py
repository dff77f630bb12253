from __future__ import annotations

import numpy as np

# Stream keys keep independent consumers of one seed from sharing draws.
STREAM_TRIANGLE = 1
STREAM_SIGMA = 2
STREAM_SIMPLEX = 3


def generator(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator; the same (seed, stream) always yields the same sequence."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    return np.random.Generator(np.random.Philox(key=[seed, stream]))
