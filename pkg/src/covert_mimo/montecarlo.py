"""Seeded Monte Carlo plumbing shared by the simulators.

Trials are split into fixed-size chunks and chunk ``c`` of stream ``s`` draws
from ``default_rng([seed, s, c])``.  Results therefore depend only on
``(seed, trials)``, never on how chunks are scheduled.
"""

from __future__ import annotations

import math

import numpy as np

CHUNK = 512
Z95 = 1.96


def chunk_rngs(seed: int, trials: int, stream: int, chunk: int = CHUNK):
    """Yield ``(rng, count)`` pairs covering ``trials`` draws."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    done, c = 0, 0
    while done < trials:
        count = min(chunk, trials - done)
        yield np.random.default_rng([int(seed), int(stream), c]), count
        done += count
        c += 1


def binomial_half_width(rate: float, trials: int) -> float:
    return Z95 * math.sqrt(max(rate * (1.0 - rate), 0.0) / trials)
