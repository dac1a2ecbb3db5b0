"""Input-validation helpers used across the public API."""
from __future__ import annotations

import numpy as np


def check_node_id(v, n: int) -> int:
    """Validate a node id against a graph of ``n`` nodes and return it as int."""
    v = int(v)
    if not 0 <= v < n:
        raise ValueError(f"node id {v} out of range for graph with {n} nodes")
    return v


def check_probability(p, name: str, *, lower_open: bool = False) -> float:
    """Validate ``p`` in [0,1] (or (0,1] when ``lower_open``) and return it as float."""
    p = float(p)
    lo_ok = p > 0.0 if lower_open else p >= 0.0
    if not (lo_ok and p <= 1.0):
        interval = "(0, 1]" if lower_open else "[0, 1]"
        raise ValueError(f"{name} must lie in {interval}, got {p}")
    return p


def check_positive_int(x, name: str, minimum: int = 1) -> int:
    """Validate an integer lower bound and return ``x`` as int."""
    x = int(x)
    if x < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {x}")
    return x


def check_scores(values, n: int | None = None, name: str = "scores") -> np.ndarray:
    """Coerce a per-node score vector to a finite 1-D float64 array."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"{name} has length {arr.shape[0]}, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_same_length(a: np.ndarray, b: np.ndarray, what: str = "score vectors") -> None:
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"{what} differ in length: {a.shape[0]} vs {b.shape[0]}")
