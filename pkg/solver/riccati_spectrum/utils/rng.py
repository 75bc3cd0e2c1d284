# solver/riccati_spectrum/utils/rng.py

import numpy as np


def path_generator(seed: int, path_index: int) -> np.random.Generator:
    """
    Counter-based stream for one Monte-Carlo path.

    Philox is keyed by (seed, path_index); the counter advances with each draw,
    so path p sees the same numbers whatever the path count or worker order.
    """
    if seed < 0 or path_index < 0:
        raise ValueError(f"seed and path_index must be non-negative, got {seed}, {path_index}")
    key = np.array([seed, path_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def brownian_increments(seed: int, n_paths: int, dt: np.ndarray) -> np.ndarray:
    """dB of shape (n_paths, len(dt)); row p is N(0, dt) drawn from stream (seed, p)."""
    dt = np.asarray(dt, dtype=float)
    scale = np.sqrt(dt)
    out = np.empty((n_paths, dt.size))
    for p in range(n_paths):
        out[p] = path_generator(seed, p).standard_normal(dt.size) * scale
    return out
