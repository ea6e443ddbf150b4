"""Parameter initialization."""

from __future__ import annotations

import math

import numpy as np

from ..errors import ConfigError
from ..rng import Rng


def variance_scaling_init(shape, fan_in: int, rng: Rng) -> np.ndarray:
    """Zero-mean normal samples with standard deviation sqrt(2 / fan_in)."""
    if fan_in < 1:
        raise ConfigError(f"fan_in must be >= 1, got {fan_in}")
    return rng.normal(shape=tuple(shape), std=math.sqrt(2.0 / fan_in))
