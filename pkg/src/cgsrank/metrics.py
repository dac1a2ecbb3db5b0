"""Ranking agreement metrics and rank-distribution histograms.

Three agreement measures between a score vector and a reference (usually
simulated influence): Kendall's tau over all node pairs, Jaccard similarity
of the top-k node sets, and a monotonicity index penalizing tied ranks.
All are rank-based, so any strictly increasing transform of a score vector
leaves them unchanged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .validation import check_positive_int, check_scores, check_same_length

__all__ = [
    "RankingReport",
    "kendall_tau",
    "jaccard_top_k",
    "monotonicity_index",
    "rank_histogram",
    "top_k_ids",
    "build_report",
]


def _tie_pairs(counts: np.ndarray) -> int:
    return int((counts * (counts - 1) // 2).sum())


def _run_lengths(change: np.ndarray, n: int) -> np.ndarray:
    idx = np.flatnonzero(change)
    starts = np.concatenate([[0], idx + 1])
    ends = np.concatenate([idx + 1, [n]])
    return ends - starts


def _merge_count(arr: np.ndarray):
    """(strict inversions, sorted copy) by divide and conquer.

    Cross-pairs are counted with a searchsorted sweep; the merge itself
    leans on timsort's galloping mode over two concatenated sorted runs.
    """
    n = arr.size
    if n < 2:
        return 0, arr
    mid = n // 2
    inv_l, left = _merge_count(arr[:mid])
    inv_r, right = _merge_count(arr[mid:])
    pos = np.searchsorted(left, right, side="right")
    cross = int((left.size - pos).sum())
    merged = np.sort(np.concatenate([left, right]), kind="stable")
    return inv_l + inv_r + cross, merged


def kendall_tau(scores_a, scores_b, variant: str = "a") -> float:
    """Kendall rank correlation by O(n log n) merge-count.

    The default variant "a" divides C - D by n(n-1)/2, so tied pairs count
    in neither C nor D. Variant "b" applies the tie-corrected denominator
    sqrt((n0-t1)(n0-t2)) and returns nan when either vector is fully tied.
    """
    a = check_scores(scores_a, name="scores_a")
    b = check_scores(scores_b, name="scores_b")
    check_same_length(a, b, "score vectors")
    n = a.size
    if n < 2:
        raise ValueError(f"need at least 2 scores, got {n}")
    if variant not in ("a", "b"):
        raise ValueError(f"variant must be 'a' or 'b', got {variant!r}")
    n0 = n * (n - 1) // 2
    perm = np.lexsort((b, a))
    a_s = a[perm]
    b_s = b[perm]
    # b_s is ascending within each a-tie run, so inversions are exactly the
    # discordant pairs
    disc, _ = _merge_count(b_s)
    t1 = _tie_pairs(_run_lengths(np.diff(a_s) != 0, n))
    t2 = _tie_pairs(_run_lengths(np.diff(np.sort(b)) != 0, n))
    t12 = _tie_pairs(_run_lengths((np.diff(a_s) != 0) | (np.diff(b_s) != 0), n))
    conc = n0 - t1 - t2 + t12 - disc
    num = conc - disc
    if variant == "a":
        return num / n0
    denom = math.sqrt(float(n0 - t1) * float(n0 - t2))
    if denom == 0.0:
        return float("nan")
    return num / denom


def top_k_ids(scores, k: int) -> np.ndarray:
    """Ids of the k best-scored nodes; ties at the cut go to lower node ids."""
    s = check_scores(scores, name="scores")
    check_positive_int(k, "k")
    if k > s.size:
        raise ValueError(f"k={k} exceeds number of nodes {s.size}")
    order = np.argsort(-s, kind="stable")
    return np.sort(order[:k])


def jaccard_top_k(scores_a, scores_b, k: int) -> float:
    """|A ∩ B| / |A ∪ B| for the two top-k node sets."""
    a = check_scores(scores_a, name="scores_a")
    b = check_scores(scores_b, name="scores_b")
    check_same_length(a, b, "score vectors")
    top_a = top_k_ids(a, k)
    top_b = top_k_ids(b, k)
    inter = np.intersect1d(top_a, top_b, assume_unique=True).size
    union = 2 * k - inter
    return inter / union


def monotonicity_index(scores, literal_unique_ranks: bool = False) -> float:
    """(1 - sum_r N_r(N_r-1) / (N(N-1)))^2 with N the total node count.

    ``literal_unique_ranks=True`` swaps the denominator for N_u(N_u-1) with
    N_u the number of distinct ranks; that reading degenerates when every
    score ties (division by zero), which this flag maps to 0.0.
    """
    s = check_scores(scores, name="scores")
    n = s.size
    if n < 2:
        raise ValueError(f"need at least 2 scores, got {n}")
    _, counts = np.unique(s, return_counts=True)
    tied = float((counts * (counts - 1)).sum())
    if literal_unique_ranks:
        n_u = counts.size
        if n_u < 2:
            return 0.0
        denom = float(n_u * (n_u - 1))
    else:
        denom = float(n * (n - 1))
    return (1.0 - tied / denom) ** 2


def rank_histogram(scores, bins: int) -> dict[int, int]:
    """Histogram of dense ranks (1 = best, equal scores share a rank).

    Returns a map from 1-based bin index to count; with ``bins`` equal to
    the number of distinct scores, bin i is exactly rank i. Counts always
    sum to the number of nodes.
    """
    s = check_scores(scores, name="scores")
    check_positive_int(bins, "bins")
    uniq = np.unique(s)
    ranks = uniq.size - np.searchsorted(uniq, s)
    counts, _ = np.histogram(ranks, bins=bins, range=(0.5, uniq.size + 0.5))
    return {i + 1: int(c) for i, c in enumerate(counts)}


@dataclass(frozen=True)
class RankingReport:
    """One method's agreement with the reference ranking on one graph."""

    method: str
    kendall_tau: float
    jaccard_at_k: dict[int, float] = field(default_factory=dict)
    monotonicity: float = 0.0
    rank_histogram: dict[int, int] = field(default_factory=dict)
    wall_time_seconds: float = 0.0

    def __post_init__(self):
        if not (math.isnan(self.kendall_tau) or -1.0 <= self.kendall_tau <= 1.0):
            raise ValueError(f"kendall_tau out of [-1,1]: {self.kendall_tau}")
        for k, v in self.jaccard_at_k.items():
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"jaccard_at_k[{k}] out of [0,1]: {v}")
        if not 0.0 <= self.monotonicity <= 1.0:
            raise ValueError(f"monotonicity out of [0,1]: {self.monotonicity}")


def build_report(
    reference,
    scores,
    method: str,
    ks,
    tau_variant: str = "a",
    wall_time_seconds: float = 0.0,
) -> RankingReport:
    """Evaluate one score vector against the reference at the given k grid.

    The histogram is dense (one bin per distinct score value of the method).
    """
    ref = check_scores(reference, name="reference")
    s = check_scores(scores, name="scores")
    check_same_length(ref, s, "reference and scores")
    n_ranks = int(np.unique(s).size)
    return RankingReport(
        method=method,
        kendall_tau=kendall_tau(ref, s, variant=tau_variant),
        jaccard_at_k={int(k): jaccard_top_k(ref, s, int(k)) for k in ks},
        monotonicity=monotonicity_index(s),
        rank_histogram=rank_histogram(s, n_ranks),
        wall_time_seconds=float(wall_time_seconds),
    )
