"""Baseline node rankers and the community detection V-community requires.

All scorers are pure functions from an immutable Graph to per-node scores.
Betweenness runs a compiled Brandes accumulation; everything else is plain
numpy plus small Python loops.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ParseError
from .graph import Graph
from .validation import check_probability, check_scores

__all__ = [
    "KNOWN_METHODS",
    "CentralityScores",
    "Partition",
    "degree_centrality",
    "betweenness_centrality",
    "h_index",
    "k_core",
    "mdd",
    "neighborhood_degree",
    "louvain",
    "v_community",
    "write_scores_csv",
    "read_scores_csv",
]

KNOWN_METHODS = ("DC", "BC", "HI", "KCORE", "VC", "MDD", "ND", "1D-CGS")
SCORES_CSV_HEADER = "node_id,method,score"


@dataclass(frozen=True)
class CentralityScores:
    """Per-node real scores tagged with the producing method."""

    method: str
    values: np.ndarray

    def __post_init__(self):
        if self.method not in KNOWN_METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {KNOWN_METHODS}")
        check_scores(self.values, name=f"{self.method} scores")
        self.values.flags.writeable = False


@dataclass(frozen=True)
class Partition:
    """A node partition with contiguous integer community labels from 0."""

    labels: np.ndarray
    modularity: float

    def __post_init__(self):
        self.labels.flags.writeable = False

    @property
    def n_communities(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0


def degree_centrality(g: Graph) -> CentralityScores:
    """deg(v)/(n-1) per node; requires n >= 2."""
    if g.n < 2:
        raise ValueError(f"degree_centrality requires n >= 2, got {g.n}")
    values = g.degrees.astype(np.float64) / (g.n - 1)
    return CentralityScores(method="DC", values=values)


@njit(cache=True)
def _brandes_kernel(indptr, indices):
    n = indptr.shape[0] - 1
    bc = np.zeros(n)
    dist = np.empty(n, dtype=np.int64)
    sigma = np.empty(n)
    delta = np.empty(n)
    order = np.empty(n, dtype=np.int64)
    for s in range(n):
        for i in range(n):
            dist[i] = -1
            sigma[i] = 0.0
            delta[i] = 0.0
        dist[s] = 0
        sigma[s] = 1.0
        order[0] = s
        head, tail = 0, 1
        while head < tail:
            u = order[head]
            head += 1
            du = dist[u]
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                if dist[v] < 0:
                    dist[v] = du + 1
                    order[tail] = v
                    tail += 1
                if dist[v] == du + 1:
                    sigma[v] += sigma[u]
        # dependency accumulation in reverse BFS order; a node's predecessors
        # are exactly its neighbors one level closer to s
        for i in range(tail - 1, 0, -1):
            u = order[i]
            coeff = (1.0 + delta[u]) / sigma[u]
            du = dist[u]
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                if dist[v] == du - 1:
                    delta[v] += sigma[v] * coeff
        for i in range(n):
            if i != s:
                bc[i] += delta[i]
    return bc


def betweenness_centrality(g: Graph) -> CentralityScores:
    """Unnormalized shortest-path betweenness (Brandes' accumulation).

    Each unordered source-target pair contributes once; endpoints score 0 for
    their own pairs. Disconnected pairs contribute nothing.
    """
    indptr = np.ascontiguousarray(g.indptr, dtype=np.int64)
    indices = np.ascontiguousarray(g.indices, dtype=np.int64)
    values = _brandes_kernel(indptr, indices) / 2.0
    return CentralityScores(method="BC", values=values)


def h_index(g: Graph) -> CentralityScores:
    """Largest h such that the node has >= h neighbors of degree >= h."""
    deg = g.degrees
    values = np.zeros(g.n)
    for v in range(g.n):
        nd = np.sort(deg[g.neighbors(v)])[::-1]
        h = 0
        for i, d in enumerate(nd, start=1):
            if d >= i:
                h = i
            else:
                break
        values[v] = h
    return CentralityScores(method="HI", values=values)


def k_core(g: Graph) -> CentralityScores:
    """Core index per node via iterative minimum-degree peeling."""
    deg = g.degrees.astype(np.int64).copy()
    alive = np.ones(g.n, dtype=bool)
    core = np.zeros(g.n, dtype=np.int64)
    k = 0
    remaining = g.n
    while remaining:
        k = max(k, int(deg[alive].min()))
        stack = list(np.flatnonzero(alive & (deg <= k)))
        while stack:
            v = stack.pop()
            if not alive[v]:
                continue
            alive[v] = False
            core[v] = k
            remaining -= 1
            for u in g.neighbors(int(v)):
                if alive[u]:
                    deg[u] -= 1
                    if deg[u] <= k:
                        stack.append(int(u))
    return CentralityScores(method="KCORE", values=core.astype(np.float64))


def mdd(g: Graph, lam: float = 0.7) -> CentralityScores:
    """Mixed degree decomposition score.

    Iteratively peels nodes by mixed degree
    ``k_m(v) = k_residual(v) + lam * (k_original(v) - k_residual(v))``;
    a node's score is the k_m threshold of the stage that removed it, and
    removals cascade within a stage. ``lam=1`` ranks like degree, ``lam=0``
    like the k-core index.
    """
    lam = check_probability(lam, "lam")
    kd = g.degrees.astype(np.float64)
    ks = kd.copy()
    alive = np.ones(g.n, dtype=bool)
    score = np.zeros(g.n)
    # float tolerance groups nodes whose k_m agree up to representation noise
    eps = 1e-9
    while alive.any():
        km = ks + lam * (kd - ks)
        t = float(km[alive].min())
        while True:
            km = ks + lam * (kd - ks)
            batch = alive & (km <= t + eps)
            if not batch.any():
                break
            score[batch] = t
            alive[batch] = False
            removed = np.flatnonzero(batch)
            touched = np.concatenate([g.neighbors(int(v)) for v in removed])
            dec = np.zeros(g.n)
            np.add.at(dec, touched, 1.0)
            ks = np.where(alive, ks - dec, ks)
    return CentralityScores(method="MDD", values=score)


def neighborhood_degree(g: Graph) -> CentralityScores:
    """Total degree of a node's neighbors."""
    deg = g.degrees.astype(np.float64)
    values = g.adjacency_csr() @ deg if g.m else np.zeros(g.n)
    return CentralityScores(method="ND", values=values)


def louvain(g: Graph, seed: int = 0) -> Partition:
    """Two-phase modularity maximization with pinned deterministic order.

    Nodes are scanned in ascending id order; a node moves only on a strictly
    positive modularity gain, and among tied best gains the lowest community
    label wins. Local moves repeat to a fixed point, communities aggregate,
    and the two phases alternate until aggregation changes nothing. ``seed``
    is accepted for interface stability but unused; the procedure has no
    randomized choice left.

    Raises
    ------
    ValueError
        If the graph has no edges.
    """
    del seed
    if g.m < 1:
        raise ValueError("louvain requires a graph with at least one edge")

    # current level: weighted adjacency as dict-of-dicts plus self-loop weights
    nbrs = [
        {int(u): 1.0 for u in g.neighbors(v)} for v in range(g.n)
    ]
    self_w = [0.0] * g.n
    node_members = [[v] for v in range(g.n)]
    m2 = 2.0 * g.m  # total degree mass, constant across levels

    final = np.arange(g.n, dtype=np.int64)

    while True:
        n_cur = len(nbrs)
        k_tot = [sum(nbrs[v].values()) + 2.0 * self_w[v] for v in range(n_cur)]
        comm = list(range(n_cur))
        tot = k_tot.copy()

        improved_any = True
        while improved_any:
            improved_any = False
            for v in range(n_cur):
                cv = comm[v]
                kv = k_tot[v]
                # weights from v to each neighboring community
                links: dict = {}
                for u, w in nbrs[v].items():
                    links[comm[u]] = links.get(comm[u], 0.0) + w
                tot[cv] -= kv
                best_c = cv
                best_gain = links.get(cv, 0.0) - kv * tot[cv] / m2
                # ascending label scan: the lowest label wins ties, and a move
                # happens only on a strictly positive gain over staying
                for c in sorted(links):
                    if c == cv:
                        continue
                    gain = links[c] - kv * tot[c] / m2
                    if gain > best_gain + 1e-12:
                        best_gain = gain
                        best_c = c
                comm[v] = best_c
                tot[best_c] += kv
                if best_c != cv:
                    improved_any = True

        # relabel communities contiguously in first-occurrence order
        relabel: dict = {}
        for v in range(n_cur):
            if comm[v] not in relabel:
                relabel[comm[v]] = len(relabel)
        comm = [relabel[c] for c in comm]
        n_comm = len(relabel)

        for v in range(n_cur):
            for orig in node_members[v]:
                final[orig] = comm[v]

        if n_comm == n_cur:
            break

        # aggregate: communities become nodes; intra-community weight
        # accumulates into self-loops
        new_nbrs = [dict() for _ in range(n_comm)]
        new_self = [0.0] * n_comm
        new_members = [[] for _ in range(n_comm)]
        for v in range(n_cur):
            cv = comm[v]
            new_members[cv].extend(node_members[v])
            new_self[cv] += self_w[v]
            for u, w in nbrs[v].items():
                cu = comm[u]
                if cu == cv:
                    new_self[cv] += 0.5 * w  # each intra edge visited twice
                else:
                    new_nbrs[cv][cu] = new_nbrs[cv].get(cu, 0.0) + w
        nbrs = new_nbrs
        self_w = new_self
        node_members = new_members

    labels = final
    return Partition(labels=labels, modularity=_modularity(g, labels))


def _modularity(g: Graph, labels: np.ndarray) -> float:
    """Newman modularity of a partition on the original unweighted graph."""
    deg = g.degrees.astype(np.float64)
    m2 = 2.0 * g.m
    n_comm = int(labels.max()) + 1
    intra = np.zeros(n_comm)
    for v in range(g.n):
        for u in g.neighbors(v):
            if labels[v] == labels[u]:
                intra[labels[v]] += 1.0  # counts each intra edge twice
    tot = np.zeros(n_comm)
    np.add.at(tot, labels, deg)
    return float((intra / m2 - (tot / m2) ** 2).sum())


def v_community(g: Graph, partition: Partition) -> CentralityScores:
    """Distinct community labels among a node's neighbors (isolates score 0)."""
    labels = partition.labels
    if labels.shape[0] != g.n:
        raise ValueError(f"partition covers {labels.shape[0]} nodes, graph has {g.n}")
    values = np.zeros(g.n)
    for v in range(g.n):
        nb = g.neighbors(v)
        values[v] = len(set(labels[nb].tolist())) if nb.size else 0
    return CentralityScores(method="VC", values=values)


def write_scores_csv(scores, g: Graph, path) -> None:
    """Persist one or more CentralityScores in long form (node_id,method,score)."""
    if isinstance(scores, CentralityScores):
        scores = [scores]
    with open(os.fspath(path), "w", encoding="utf-8") as fh:
        fh.write(SCORES_CSV_HEADER + "\n")
        for cs in scores:
            check_scores(cs.values, g.n, name=f"{cs.method} scores")
            for v in range(g.n):
                fh.write(f"{g.labels[v]},{cs.method},{float(cs.values[v])!r}\n")


def read_scores_csv(path):
    """Read a long-form scores CSV; returns dict method -> (tokens, values)."""
    out: dict = {}
    with open(os.fspath(path), "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != SCORES_CSV_HEADER:
            raise ParseError(f"expected header {SCORES_CSV_HEADER!r}, got {header!r}", line=1)
        for ln, raw in enumerate(fh, start=2):
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ParseError("expected node_id,method,score", line=ln)
            tok, method, val = parts
            out.setdefault(method, ([], []))
            out[method][0].append(tok)
            try:
                out[method][1].append(float(val))
            except ValueError as exc:
                raise ParseError(f"bad score value {val!r}", line=ln) from exc
    return {
        method: (tokens, np.asarray(vals, dtype=np.float64))
        for method, (tokens, vals) in out.items()
    }
