"""Undirected simple graphs: representation, ingestion, BA synthesis, features.

The Graph type is an immutable CSR adjacency structure with contiguous integer
node ids. Original node tokens from edge-list files are kept in ``labels`` so
rankings can be reported against the input's own naming.
"""
from __future__ import annotations

import hashlib
import math
import os
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import ParseError
from .validation import check_node_id, check_positive_int

__all__ = [
    "Graph",
    "NetworkStats",
    "load_edge_list",
    "save_edge_list",
    "generate_ba",
    "average_neighbor_degree",
    "feature_matrix",
    "network_stats",
    "stats_csv",
]

STATS_CSV_HEADER = "n,m,density,avg_degree,max_degree,mu_c"


@dataclass(frozen=True)
class Graph:
    """Immutable undirected simple graph in CSR form.

    Attributes
    ----------
    n : int
        Node count. Ids are contiguous integers 0..n-1.
    m : int
        Edge count (each undirected edge counted once).
    indptr : numpy.ndarray
        int64 array of length n+1; row pointers into ``indices``.
    indices : numpy.ndarray
        int64 array of length 2m; per-row neighbor lists, strictly increasing.
    labels : tuple
        Original node tokens; ``labels[i]`` names node i. Identity strings for
        generated graphs.
    """

    n: int
    m: int
    indptr: np.ndarray
    indices: np.ndarray
    labels: tuple

    def __post_init__(self):
        self.indptr.flags.writeable = False
        self.indices.flags.writeable = False

    @classmethod
    def from_edges(cls, n: int, edges, labels=None) -> "Graph":
        """Build a Graph from an iterable of (u, v) id pairs.

        Self-loops and duplicate edges are dropped silently; use
        :func:`load_edge_list` for the warning-emitting ingestion path.
        """
        n = check_positive_int(n, "n", minimum=0)
        arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise ValueError("edge endpoint out of range")
        keep = arr[:, 0] != arr[:, 1]
        arr = arr[keep]
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        canon = np.unique(np.stack([lo, hi], axis=1), axis=0) if arr.size else arr
        m = int(canon.shape[0])
        both = np.concatenate([canon, canon[:, ::-1]]) if m else np.empty((0, 2), dtype=np.int64)
        order = np.lexsort((both[:, 1], both[:, 0]))
        both = both[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, both[:, 0] + 1, 1)
        indptr = np.cumsum(indptr, dtype=np.int64)
        if labels is None:
            labels = tuple(str(i) for i in range(n))
        else:
            labels = tuple(labels)
            if len(labels) != n:
                raise ValueError(f"labels has length {len(labels)}, expected {n}")
        return cls(n=n, m=m, indptr=indptr, indices=both[:, 1].copy(), labels=labels)

    @cached_property
    def degrees(self) -> np.ndarray:
        """Per-node degree as an int64 array."""
        deg = np.diff(self.indptr)
        deg.flags.writeable = False
        return deg

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted neighbor ids of node ``v`` (read-only view)."""
        v = check_node_id(v, self.n)
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    @cached_property
    def fingerprint(self) -> str:
        """SHA-256 over (n, m, indptr, indices); identifies the edge set."""
        h = hashlib.sha256()
        h.update(b"cgsrank-graph-v1")
        h.update(int(self.n).to_bytes(8, "little"))
        h.update(int(self.m).to_bytes(8, "little"))
        h.update(np.ascontiguousarray(self.indptr).tobytes())
        h.update(np.ascontiguousarray(self.indices).tobytes())
        return h.hexdigest()

    def adjacency_csr(self) -> sp.csr_array:
        """The adjacency matrix as a scipy CSR array of float64 ones."""
        data = np.ones(self.indices.shape[0], dtype=np.float64)
        return sp.csr_array((data, self.indices, self.indptr), shape=(self.n, self.n))

    def id_of(self, token: str) -> int:
        """The contiguous id of an original node token."""
        return self._token_index[token]

    @cached_property
    def _token_index(self) -> dict:
        return {tok: i for i, tok in enumerate(self.labels)}

    def validate(self) -> None:
        """Assert the structural invariants (symmetry, sortedness, degree sum)."""
        assert self.indptr.shape == (self.n + 1,)
        assert self.indptr[0] == 0 and self.indptr[-1] == self.indices.shape[0]
        assert int(self.degrees.sum()) == 2 * self.m
        for v in range(self.n):
            nb = self.neighbors(v)
            assert np.all(np.diff(nb) > 0), f"adjacency of {v} not strictly increasing"
            assert not np.any(nb == v), f"self-loop at {v}"
            for u in nb:
                assert v in self.neighbors(int(u)), f"asymmetric edge ({v},{u})"


def load_edge_list(source) -> Graph:
    """Parse a whitespace-separated edge list into a Graph.

    Parameters
    ----------
    source : path-like or text stream
        One edge per line, two whitespace-separated node tokens. Lines starting
        with '#' or '%' and blank lines are ignored. Tokens map to contiguous
        ids in first-seen order.

    Returns
    -------
    Graph

    Raises
    ------
    ParseError
        On a line with a token count other than 2 (reported with its line
        number) or when the input holds no edges at all.

    Warns
    -----
    UserWarning
        When duplicate edges or self-loops were dropped, with counts.
    """
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        with open(os.fspath(source), "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()

    token_ids: dict = {}
    tokens: list = []
    edges: list = []
    seen: set = set()
    n_self = 0
    n_dup = 0
    for ln, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line[0] in "#%":
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected 2 node tokens, got {len(parts)}", line=ln)
        ids = []
        for tok in parts:
            if tok not in token_ids:
                token_ids[tok] = len(tokens)
                tokens.append(tok)
            ids.append(token_ids[tok])
        u, v = ids
        if u == v:
            n_self += 1
            continue
        key = (u, v) if u < v else (v, u)
        if key in seen:
            n_dup += 1
            continue
        seen.add(key)
        edges.append(key)

    if not tokens:
        raise ParseError("empty edge list: no edges found")
    if n_dup or n_self:
        warnings.warn(
            f"dropped {n_dup} duplicate edge(s) and {n_self} self-loop(s) during ingestion",
            stacklevel=2,
        )
    return Graph.from_edges(len(tokens), edges, labels=tokens)


def save_edge_list(g: Graph, path) -> None:
    """Write ``g`` as a deterministic edge list using original node tokens.

    Edges are emitted once each, ordered by (u, v) id with u < v.
    """
    with open(os.fspath(path), "w", encoding="utf-8") as fh:
        for u in range(g.n):
            for v in g.neighbors(u):
                if u < v:
                    fh.write(f"{g.labels[u]} {g.labels[int(v)]}\n")


def generate_ba(n: int, m_attach: int, seed: int) -> Graph:
    """Barabasi-Albert preferential-attachment graph.

    Growth with forced attachment: node j <= m_attach attaches to every prior
    node (so the first m_attach+1 nodes form a complete seed), and each later
    node attaches to m_attach distinct existing nodes sampled proportionally
    to degree. Edge count is exactly
    ``m_attach*(n - m_attach - 1) + (m_attach+1)*m_attach/2``.

    Parameters
    ----------
    n : int
        Node count; must exceed ``m_attach``.
    m_attach : int
        Edges added per new node, >= 1.
    seed : int
        Determines the attachment choices; identical seeds give identical
        edge sets.

    Returns
    -------
    Graph
    """
    m_attach = check_positive_int(m_attach, "m_attach")
    n = int(n)
    if n <= m_attach:
        raise ValueError(f"n must exceed m_attach, got n={n} m_attach={m_attach}")
    rng = np.random.default_rng(int(seed))
    edges = []
    # endpoint multiset; uniform draws from it are degree-proportional
    rep: list = []
    for v in range(1, m_attach + 1):
        for u in range(v):
            edges.append((u, v))
            rep.append(u)
            rep.append(v)
    for v in range(m_attach + 1, n):
        targets: set = set()
        while len(targets) < m_attach:
            targets.add(rep[int(rng.integers(0, len(rep)))])
        for u in sorted(targets):
            edges.append((u, v))
            rep.append(u)
            rep.append(v)
    return Graph.from_edges(n, edges)


def average_neighbor_degree(g: Graph, v: int) -> float:
    """Mean degree over ``v``'s neighbors; 0.0 for an isolated node."""
    nb = g.neighbors(v)
    if nb.shape[0] == 0:
        return 0.0
    return float(g.degrees[nb].mean())


def feature_matrix(g: Graph) -> np.ndarray:
    """Per-node feature rows [degree, average neighbor degree], shape (n, 2)."""
    deg = g.degrees.astype(np.float64)
    nbr_deg_sum = g.adjacency_csr() @ deg if g.m else np.zeros(g.n)
    and_col = np.where(deg > 0, nbr_deg_sum / np.maximum(deg, 1.0), 0.0)
    return np.stack([deg, and_col], axis=1)


@dataclass(frozen=True)
class NetworkStats:
    """Topological summary of a graph.

    ``epidemic_threshold`` is ``<k>/(<k^2> - <k>)``, reported as ``inf`` with a
    warning for the degenerate 1-regular (perfect matching) case.
    """

    n: int
    m: int
    density: float
    avg_degree: float
    second_moment: float
    max_degree: int
    epidemic_threshold: float


def network_stats(g: Graph) -> NetworkStats:
    """Table-style statistics including the SIR epidemic threshold."""
    if g.n < 2:
        raise ValueError(f"network_stats requires n >= 2, got {g.n}")
    deg = g.degrees.astype(np.float64)
    k1 = float(deg.mean())
    k2 = float((deg ** 2).mean())
    if k2 > k1:
        mu_c = k1 / (k2 - k1)
    else:
        warnings.warn(
            "degenerate degree distribution (<k^2> == <k>): epidemic threshold reported as inf",
            stacklevel=2,
        )
        mu_c = math.inf
    return NetworkStats(
        n=g.n,
        m=g.m,
        density=2.0 * g.m / (g.n * (g.n - 1)),
        avg_degree=k1,
        second_moment=k2,
        max_degree=int(deg.max()) if g.n else 0,
        epidemic_threshold=mu_c,
    )


def stats_csv(stats: NetworkStats) -> str:
    """One-row CSV rendering with the pinned header."""
    row = [
        str(stats.n),
        str(stats.m),
        repr(stats.density),
        repr(stats.avg_degree),
        str(stats.max_degree),
        repr(stats.epidemic_threshold),
    ]
    return STATS_CSV_HEADER + "\n" + ",".join(row) + "\n"
