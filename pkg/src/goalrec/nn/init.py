"""Deterministic weight initializers.

Every initializer takes either a seed or an already-constructed numpy
``Generator`` so callers can thread one stream through a whole model build.
All tensors are float64.
"""
from __future__ import annotations

import math

import numpy as np

from ..errors import ShapeError


def as_rng(seed_or_rng) -> np.random.Generator:
    """Return a numpy Generator for an int seed, passing Generators through."""
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def glorot_uniform(rows: int, cols: int, rng) -> np.ndarray:
    """Sample a (rows, cols) matrix uniformly from [-L, L], L = sqrt(6/(rows+cols)).

    Deterministic for a fixed seed. Raises ShapeError on empty dimensions.
    """
    if rows < 1 or cols < 1:
        raise ShapeError(f"glorot_uniform needs positive dimensions, got {rows}x{cols}")
    limit = math.sqrt(6.0 / (rows + cols))
    return as_rng(rng).uniform(-limit, limit, size=(rows, cols)).astype(np.float64)


def embedding_uniform(rows: int, cols: int, rng, scale: float = 0.05) -> np.ndarray:
    """Sample a (rows, cols) embedding matrix uniformly from [-scale, scale]."""
    if rows < 1 or cols < 1:
        raise ShapeError(f"embedding_uniform needs positive dimensions, got {rows}x{cols}")
    return as_rng(rng).uniform(-scale, scale, size=(rows, cols)).astype(np.float64)
