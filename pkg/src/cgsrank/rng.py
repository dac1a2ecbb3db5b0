"""Named RNG substreams derived from one root seed.

Every random choice in the pipeline flows from a single root seed through a
named substream, so stages can share the root without their streams colliding
and a full pipeline rerun with the same root is bit-identical.
"""
from __future__ import annotations

import numpy as np

# Stream codes are part of the on-disk reproducibility contract; never renumber.
STREAM_CODES = {
    "ba": 0,
    "labels": 1,
    "init": 2,
}


def substream_seed(root_seed: int, stream: str) -> int:
    """Derive the integer seed for a named substream of ``root_seed``.

    Parameters
    ----------
    root_seed : int
        The pipeline's global seed.
    stream : str
        One of ``"ba"``, ``"labels"``, ``"init"``.

    Returns
    -------
    int
        A 64-bit seed, deterministic in (root_seed, stream).
    """
    if stream not in STREAM_CODES:
        raise ValueError(f"unknown RNG stream {stream!r}; expected one of {sorted(STREAM_CODES)}")
    ss = np.random.SeedSequence([int(root_seed), STREAM_CODES[stream]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def generator(root_seed: int, stream: str) -> np.random.Generator:
    """A ``numpy.random.Generator`` on the named substream of ``root_seed``."""
    if stream not in STREAM_CODES:
        raise ValueError(f"unknown RNG stream {stream!r}; expected one of {sorted(STREAM_CODES)}")
    ss = np.random.SeedSequence([int(root_seed), STREAM_CODES[stream]])
    return np.random.default_rng(ss)
