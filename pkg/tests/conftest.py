"""Shared fixtures and independent oracles.

Oracles here are deliberately naive (pair enumeration, brute-force path
counting, direct definitions) so the optimized implementations are checked
against something written a different way.
"""
from __future__ import annotations

import itertools
from collections import deque

import numpy as np
import pytest

from cgsrank import Graph


def build_graph(edges, n_hint=None):
    """Graph from (u, v) int pairs; isolated trailing nodes via n_hint."""
    edges = list(edges)
    n = max((max(e) for e in edges), default=-1) + 1
    if n_hint is not None:
        n = max(n, n_hint)
    return Graph.from_edges(n, edges)


@pytest.fixture
def path3():
    # a - b - c
    return build_graph([(0, 1), (1, 2)])


@pytest.fixture
def path4():
    return build_graph([(0, 1), (1, 2), (2, 3)])


@pytest.fixture
def star4():
    # hub 0 with leaves 1..3
    return build_graph([(0, 1), (0, 2), (0, 3)])


@pytest.fixture
def star5():
    return build_graph([(0, 1), (0, 2), (0, 3), (0, 4)])


@pytest.fixture
def triangle():
    return build_graph([(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def triangle_pendant():
    # triangle 0-1-2 plus pendant 3 hanging off 0
    return build_graph([(0, 1), (1, 2), (0, 2), (0, 3)])


@pytest.fixture
def two_cliques():
    # K4 on 0..3 and K4 on 4..7 joined by the bridge 3-4
    edges = [(a, b) for a, b in itertools.combinations(range(4), 2)]
    edges += [(a + 4, b + 4) for a, b in itertools.combinations(range(4), 2)]
    edges.append((3, 4))
    return build_graph(edges)


def random_gnp(n, p, rng):
    """Edge list of a G(n, p) draw."""
    edges = [(u, v) for u, v in itertools.combinations(range(n), 2) if rng.random() < p]
    return edges


def random_gnp_graph(n, p, rng):
    return build_graph(random_gnp(n, p, rng), n_hint=n)


def random_connected_graph(n, rng, extra=0.4):
    """Connected graph on n nodes: random spanning tree plus extra edges."""
    edges = set()
    nodes = list(range(n))
    rng.shuffle(nodes)
    for i in range(1, n):
        j = int(rng.integers(0, i))
        u, v = nodes[i], nodes[j]
        edges.add((min(u, v), max(u, v)))
    for u, v in itertools.combinations(range(n), 2):
        if rng.random() < extra:
            edges.add((u, v))
    return build_graph(sorted(edges), n_hint=n)


# ---- oracles ----


def kendall_oracle(a, b, variant="a"):
    """O(n^2) pair enumeration."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = a.size
    conc = disc = ta = tb = tab = 0
    for i in range(n):
        for j in range(i + 1, n):
            da = np.sign(a[i] - a[j])
            db = np.sign(b[i] - b[j])
            if da == 0 and db == 0:
                tab += 1
            elif da == 0:
                ta += 1
            elif db == 0:
                tb += 1
            elif da == db:
                conc += 1
            else:
                disc += 1
    n0 = n * (n - 1) // 2
    num = conc - disc
    if variant == "a":
        return num / n0
    denom = np.sqrt(float(n0 - ta - tab) * float(n0 - tb - tab))
    if denom == 0.0:
        return float("nan")
    return num / denom


def betweenness_oracle(g: Graph):
    """Brute force: enumerate every shortest path of every node pair."""
    n = g.n
    bc = np.zeros(n)
    for s, t in itertools.combinations(range(n), 2):
        dist = {s: 0}
        q = deque([s])
        while q:
            u = q.popleft()
            for v in g.neighbors(u):
                if v not in dist:
                    dist[v] = dist[u] + 1
                    q.append(v)
        if t not in dist:
            continue
        paths = []
        stack = [(t, [t])]
        while stack:
            u, path = stack.pop()
            if u == s:
                paths.append(path)
                continue
            for v in g.neighbors(u):
                if v in dist and dist[v] == dist[u] - 1:
                    stack.append((v, path + [v]))
        for path in paths:
            for v in path[1:-1]:
                bc[v] += 1.0 / len(paths)
    return bc


def degree_oracle(g: Graph):
    return np.array([len(g.neighbors(v)) / (g.n - 1) for v in range(g.n)])


def h_index_oracle(g: Graph):
    out = np.zeros(g.n)
    for v in range(g.n):
        degs = sorted((len(g.neighbors(u)) for u in g.neighbors(v)), reverse=True)
        h = 0
        for i, d in enumerate(degs, start=1):
            if d >= i:
                h = i
        out[v] = h
    return out


def k_core_oracle(g: Graph):
    """Repeatedly strip nodes of degree < k for growing k."""
    alive = set(range(g.n))
    core = np.zeros(g.n)
    k = 0
    while alive:
        k += 1
        while True:
            drop = [v for v in alive if sum(1 for u in g.neighbors(v) if u in alive) < k]
            if not drop:
                break
            for v in drop:
                core[v] = k - 1
                alive.discard(v)
    return core


def nd_oracle(g: Graph):
    return np.array(
        [float(sum(len(g.neighbors(u)) for u in g.neighbors(v))) for v in range(g.n)]
    )
