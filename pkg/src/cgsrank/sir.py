"""Monte Carlo SIR spreading simulation and an exact enumeration oracle.

The discrete-time synchronous process: every currently infected node attempts
to infect each susceptible neighbor independently with probability ``mu``,
then every node that was infected at the start of the step recovers with
probability ``beta`` (so a node stays infectious for at least one full step).
The outbreak size is the recovered count at termination, source included.

Per-node influence labels average the outbreak size over many trials. Each
(node, trial) pair runs on its own counter-based RNG substream keyed by
(seed, node, trial), and per-node outbreak totals accumulate in int64, so
labels are bit-identical regardless of the order or parallelism with which
trials execute.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit

from .errors import ParseError
from .graph import Graph
from .validation import check_node_id, check_positive_int, check_probability

__all__ = [
    "SirParams",
    "InfluenceLabels",
    "sir_trial",
    "exact_influence",
    "influence_labels",
    "save_labels",
    "load_labels",
]

LABELS_CSV_HEADER = "node_id,label"
_EXACT_MAX_NODES = 12

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_SPLITMIX_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_NODE_SALT = np.uint64(0xD2B74407B1CE6E93)
_TRIAL_SALT = np.uint64(0xCA5A826395121157)
# 2^-53; top 53 bits of a splitmix output give a uniform double in [0, 1)
_INV_2_53 = 1.0 / 9007199254740992.0


@dataclass(frozen=True)
class SirParams:
    """Simulation parameters.

    Attributes
    ----------
    mu : float
        Per-contact, per-step infection probability in [0, 1].
    beta : float
        Per-step recovery probability in (0, 1]. Defaults to 1 (a node is
        infectious for exactly one step).
    trials : int
        Monte Carlo repetitions per source node, >= 1.
    seed : int
        Root of the per-(node, trial) substreams.
    """

    mu: float
    beta: float = 1.0
    trials: int = 1000
    seed: int = 0

    def __post_init__(self):
        check_probability(self.mu, "mu")
        check_probability(self.beta, "beta", lower_open=True)
        check_positive_int(self.trials, "trials")


@dataclass(frozen=True)
class InfluenceLabels:
    """Per-node mean SIR outbreak size plus provenance.

    ``values[v]`` is the mean outbreak over ``params.trials`` trials seeded at
    node v; ``stderr[v]`` is the standard error of that mean (0 when
    ``trials == 1``). All values lie in [1, n].
    """

    values: np.ndarray
    stderr: np.ndarray
    params: SirParams
    graph_fingerprint: str

    def __post_init__(self):
        self.values.flags.writeable = False
        self.stderr.flags.writeable = False


@njit(cache=True, inline="always")
def _splitmix_next(state):
    state = (state + _SPLITMIX_GAMMA) & _MASK64
    z = state
    z = ((z ^ (z >> np.uint64(30))) * _MIX1) & _MASK64
    z = ((z ^ (z >> np.uint64(27))) * _MIX2) & _MASK64
    z = z ^ (z >> np.uint64(31))
    return state, z


@njit(cache=True, inline="always")
def _trial_key(seed, v, t):
    key = np.uint64(seed)
    key, _ = _splitmix_next(key ^ (np.uint64(v) * _NODE_SALT))
    key, _ = _splitmix_next(key ^ (np.uint64(t) * _TRIAL_SALT))
    return key


@njit(cache=True)
def _sir_trial_kernel(indptr, indices, source, mu, beta, key, status, frontier, nxt):
    # status: 0=S 1=I 2=R; scratch arrays are caller-owned and reused
    n = status.shape[0]
    for i in range(n):
        status[i] = 0
    status[source] = 1
    frontier[0] = source
    n_front = 1
    n_rec = 0
    state = key
    while n_front > 0:
        n_next = 0
        for fi in range(n_front):
            u = frontier[fi]
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                if status[v] == 0:
                    state, z = _splitmix_next(state)
                    if (z >> np.uint64(11)) * _INV_2_53 < mu:
                        status[v] = 1
                        nxt[n_next] = v
                        n_next += 1
        k = 0
        for fi in range(n_front):
            u = frontier[fi]
            state, z = _splitmix_next(state)
            if (z >> np.uint64(11)) * _INV_2_53 < beta:
                status[u] = 2
                n_rec += 1
            else:
                frontier[k] = u
                k += 1
        for i in range(n_next):
            frontier[k] = nxt[i]
            k += 1
        n_front = k
    return n_rec


@njit(cache=True)
def _labels_kernel(indptr, indices, mu, beta, trials, seed):
    n = indptr.shape[0] - 1
    status = np.zeros(n, dtype=np.uint8)
    frontier = np.zeros(n, dtype=np.int64)
    nxt = np.zeros(n, dtype=np.int64)
    sums = np.zeros(n, dtype=np.int64)
    sumsq = np.zeros(n, dtype=np.int64)
    for v in range(n):
        for t in range(trials):
            key = _trial_key(seed, v, t)
            size = _sir_trial_kernel(indptr, indices, v, mu, beta, key, status, frontier, nxt)
            sums[v] += size
            sumsq[v] += size * size
    return sums, sumsq


def sir_trial(g: Graph, source: int, mu: float, beta: float, rng: np.random.Generator) -> int:
    """Run one SIR trial from ``source`` and return the outbreak size.

    Draws come from the supplied generator; this is the readable reference
    implementation of the process that :func:`influence_labels` runs in its
    compiled kernel.

    Parameters
    ----------
    g : Graph
    source : int
        Initially infected node.
    mu, beta : float
        Infection and recovery probabilities (``mu`` in [0,1], ``beta`` in
        (0,1]).
    rng : numpy.random.Generator

    Returns
    -------
    int
        Final recovered count, source included; always in [1, n].
    """
    source = check_node_id(source, g.n)
    mu = check_probability(mu, "mu")
    beta = check_probability(beta, "beta", lower_open=True)
    status = np.zeros(g.n, dtype=np.uint8)
    status[source] = 1
    frontier = [source]
    recovered = 0
    while frontier:
        newly = []
        for u in frontier:
            for v in g.neighbors(u):
                if status[v] == 0 and rng.random() < mu:
                    status[v] = 1
                    newly.append(int(v))
        survivors = []
        for u in frontier:
            if rng.random() < beta:
                status[u] = 2
                recovered += 1
            else:
                survivors.append(u)
        frontier = survivors + newly
    return recovered


def exact_influence(g: Graph, source: int, mu: float, beta: float = 1.0) -> float:
    """Exact expected outbreak size by exhaustive enumeration (n <= 12 only).

    Enumerates every stochastic branching of the synchronous SIR process,
    weighting branches by probability. States that can persist (no infection,
    no recovery, possible only when ``beta < 1``) are resolved algebraically
    by dividing out the self-transition mass.

    Raises
    ------
    ValueError
        If the graph has more than 12 nodes (state enumeration refused).
    """
    if g.n > _EXACT_MAX_NODES:
        raise ValueError(
            f"exact_influence refuses graphs with n > {_EXACT_MAX_NODES} (got n={g.n})"
        )
    source = check_node_id(source, g.n)
    mu = check_probability(mu, "mu")
    beta = check_probability(beta, "beta", lower_open=True)
    nbr_mask = [0] * g.n
    for v in range(g.n):
        for u in g.neighbors(v):
            nbr_mask[v] |= 1 << int(u)
    full = (1 << g.n) - 1

    @lru_cache(maxsize=None)
    def expected(i_mask: int, r_mask: int) -> float:
        if i_mask == 0:
            return float(r_mask.bit_count())
        # susceptible nodes with at least one infected neighbor, and their
        # per-node infection probability 1 - (1-mu)^(#infected neighbors)
        s_mask = full & ~(i_mask | r_mask)
        fringe = []
        probs = []
        rem = s_mask
        while rem:
            v = (rem & -rem).bit_length() - 1
            rem &= rem - 1
            k = (nbr_mask[v] & i_mask).bit_count()
            if k:
                fringe.append(v)
                probs.append(1.0 - (1.0 - mu) ** k)
        inf_nodes = []
        rem = i_mask
        while rem:
            u = (rem & -rem).bit_length() - 1
            rem &= rem - 1
            inf_nodes.append(u)
        n_inf = len(inf_nodes)

        total = 0.0
        stay = 0.0
        for nsub in range(1 << len(fringe)):
            p_inf = 1.0
            new_mask = 0
            for j, v in enumerate(fringe):
                if nsub >> j & 1:
                    p_inf *= probs[j]
                    new_mask |= 1 << v
                else:
                    p_inf *= 1.0 - probs[j]
            if p_inf == 0.0:
                continue
            if beta == 1.0:
                # all infected recover; single recovery branch
                total += p_inf * expected(new_mask, r_mask | i_mask)
                continue
            for ksub in range(1 << n_inf):
                rec_mask = 0
                n_rec = 0
                for j, u in enumerate(inf_nodes):
                    if ksub >> j & 1:
                        rec_mask |= 1 << u
                        n_rec += 1
                p_rec = beta ** n_rec * (1.0 - beta) ** (n_inf - n_rec)
                p = p_inf * p_rec
                if p == 0.0:
                    continue
                next_i = (i_mask & ~rec_mask) | new_mask
                next_r = r_mask | rec_mask
                if next_i == i_mask and next_r == r_mask:
                    stay += p
                else:
                    total += p * expected(next_i, next_r)
        if stay >= 1.0:
            # mu == 0 and beta < 1 cannot both hold here because beta > 0;
            # defensive: a fully absorbing self-loop would mean no progress
            raise ArithmeticError("self-transition probability reached 1")
        return total / (1.0 - stay)

    return expected(1 << source, 0)


def influence_labels(g: Graph, params: SirParams) -> InfluenceLabels:
    """Mean SIR outbreak size per source node over ``params.trials`` trials.

    Each (node, trial) pair uses an independent substream keyed by
    (seed, node, trial); results are independent of execution order.
    """
    indptr = np.ascontiguousarray(g.indptr, dtype=np.int64)
    indices = np.ascontiguousarray(g.indices, dtype=np.int64)
    sums, sumsq = _labels_kernel(
        indptr, indices, float(params.mu), float(params.beta),
        int(params.trials), np.uint64(int(params.seed) & 0xFFFFFFFFFFFFFFFF),
    )
    t = params.trials
    values = sums / t
    if t > 1:
        var = (sumsq - sums.astype(np.float64) ** 2 / t) / (t - 1)
        stderr = np.sqrt(np.maximum(var, 0.0) / t)
    else:
        stderr = np.zeros(g.n)
    return InfluenceLabels(
        values=values, stderr=stderr, params=params, graph_fingerprint=g.fingerprint
    )


def save_labels(
    labels: InfluenceLabels, g: Graph, path, wall_time_seconds: float = 0.0, extra: dict | None = None
) -> None:
    """Write labels as CSV (node_id,label) plus a JSON sidecar.

    The sidecar (``<path>.meta.json``) records the SirParams, the graph
    fingerprint, and the wall-clock time spent producing the labels;
    ``extra`` entries (e.g. a pipeline config hash) are merged in.
    """
    path = os.fspath(path)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(LABELS_CSV_HEADER + "\n")
        for v in range(g.n):
            fh.write(f"{g.labels[v]},{float(labels.values[v])!r}\n")
    sidecar = {
        "schema_version": 1,
        "kind": "influence-labels",
        "sir_params": {
            "mu": labels.params.mu,
            "beta": labels.params.beta,
            "trials": labels.params.trials,
            "seed": labels.params.seed,
        },
        "graph_fingerprint": labels.graph_fingerprint,
        "wall_time_seconds": wall_time_seconds,
    }
    if extra:
        sidecar.update(extra)
    with open(path + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_labels(path):
    """Read a labels CSV; returns (node tokens, values, sidecar dict or None)."""
    path = os.fspath(path)
    tokens = []
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != LABELS_CSV_HEADER:
            raise ParseError(f"expected header {LABELS_CSV_HEADER!r}, got {header!r}", line=1)
        for ln, raw in enumerate(fh, start=2):
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ParseError("expected node_id,label", line=ln)
            tokens.append(parts[0])
            try:
                values.append(float(parts[1]))
            except ValueError as exc:
                raise ParseError(f"bad label value {parts[1]!r}", line=ln) from exc
    meta = None
    meta_path = path + ".meta.json"
    if os.path.exists(meta_path):
        with open(meta_path, "r", encoding="utf-8") as fh:
            meta = json.load(fh)
    return tokens, np.asarray(values, dtype=np.float64), meta
