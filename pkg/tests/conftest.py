import itertools

import numpy as np
import pytest

from dsmswap.circuit import topology_from_edges

_ACCEPTANCE: dict = {}
N_CRITERIA = 11


def random_connected_graph(rng, m, p=0.4):
    """Random spanning tree plus extra edges; retries until it is not complete."""
    while True:
        order = rng.permutation(m)
        edges = set()
        for k in range(1, m):
            a, b = int(order[k]), int(order[rng.integers(k)])
            edges.add((min(a, b), max(a, b)))
        for a, b in itertools.combinations(range(m), 2):
            if rng.random() < p:
                edges.add((a, b))
        if len(edges) < m * (m - 1) // 2:
            return topology_from_edges(m, sorted(edges))


def brute_force_min_swaps(c, topology, per_boundary=2):
    """DP over layouts, at most ``per_boundary`` edge swaps before each layer."""
    m = c.m
    edges = topology.sorted_edges()

    def reach(p):
        out, frontier = {p: 0}, [p]
        for d in range(1, per_boundary + 1):
            nxt = []
            for q in frontier:
                for i, j in edges:
                    r = tuple(j if x == i else i if x == j else x for x in q)
                    if r not in out:
                        out[r] = d
                        nxt.append(r)
            frontier = nxt
        return out

    best = {tuple(range(m)): 0}
    for layer in c.layers:
        new = {}
        for p, cost in best.items():
            for q, d in reach(p).items():
                if all(topology.has_edge(q[g.q0], q[g.q1]) for g in layer):
                    if cost + d < new.get(q, 1 << 30):
                        new[q] = cost + d
        best = new
        if not best:
            return None
    return min(best.values())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def criterion():
    def record(number, ok, detail=""):
        _ACCEPTANCE[number] = (bool(ok), detail)
        return bool(ok)
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, N_CRITERIA + 1):
        if n in _ACCEPTANCE:
            ok, detail = _ACCEPTANCE[n]
            terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        else:
            terminalreporter.write_line(f"criterion {n:2d}: not run")
