"""Counter-based random streams keyed by (master seed, trial, purpose).

Each purpose gets its own Philox stream so, for example, the random-port
benchmark never shifts the channel draws of the same trial.  Gaussian
samples use the Box-Muller transform on the stream's uniforms so other
implementations can reproduce the distributions from the same recipe.
"""
from __future__ import annotations

import numpy as np

STREAM_TAGS = {"channel": 0, "init": 1, "baseline": 2, "codebook": 3}


def stream(master_seed: int, trial: int, tag: str) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(trial), STREAM_TAGS[tag]))
    return np.random.Generator(np.random.Philox(seq))


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Circularly symmetric CN(0, 1) samples via Box-Muller."""
    u1 = rng.random(shape)
    u2 = rng.random(shape)
    radius = np.sqrt(-np.log1p(-u1))
    return radius * np.exp(2j * np.pi * u2)
