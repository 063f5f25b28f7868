"""Deterministic random-stream plumbing.

All randomness in the package flows through PCG64 generators keyed by a
``(seed, *stream)`` tuple via ``numpy.random.SeedSequence``. Two calls with
the same key always produce the same draws, independent of call order,
process, or worker count. Experiments derive one integer sub-seed per trial
with :func:`derive_seed`, and simulations index noise within a trajectory by
time step, so any prefix of a run is reproducible without replaying the rest.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError


def _check_key(seed: int, stream: tuple) -> None:
    for part in (seed, *stream):
        if int(part) != part or part < 0:
            raise InvalidInputError(
                f"seed/stream components must be non-negative integers, got {part!r}"
            )


def generator(seed: int, *stream: int) -> np.random.Generator:
    """PCG64 generator deterministically keyed by (seed, *stream)."""
    _check_key(seed, stream)
    ss = np.random.SeedSequence(entropy=(int(seed),) + tuple(int(s) for s in stream))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, *key: int) -> int:
    """Collapse (seed, *key) into a fresh non-negative integer seed.

    Used to hand independent sub-streams to trials, baselines, and system
    constructions without any risk of stream overlap.
    """
    _check_key(seed, key)
    ss = np.random.SeedSequence(entropy=(int(seed),) + tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])
