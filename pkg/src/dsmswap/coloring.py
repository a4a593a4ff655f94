"""Partition of the hardware swap generators into commuting classes.

Each class is a matching of the coupling graph, so all swaps in a class
commute and can run in parallel as one depth-1 sub-layer.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .circuit import Topology
from .errors import ContractError


@dataclass(frozen=True)
class GeneratorSchedule:
    classes: tuple  # tuple[tuple[(i, j), ...], ...]
    sweeps: int = 1

    def __post_init__(self):
        if self.sweeps < 1:
            raise ContractError("sweeps must be >= 1")
        for k, cls in enumerate(self.classes):
            used = set()
            for i, j in cls:
                if i in used or j in used:
                    raise ContractError(f"class {k} is not a matching")
                used.update((i, j))

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def per_sweep(self) -> int:
        return sum(len(c) for c in self.classes)

    @property
    def S(self) -> int:
        return self.sweeps * self.per_sweep

    @cached_property
    def flat(self) -> tuple:
        """Slot order (sweep 1: class 1, class 2, ...; then sweep 2 ...)."""
        return tuple(p for _ in range(self.sweeps) for cls in self.classes for p in cls)

    @cached_property
    def slot_group(self) -> tuple:
        """Sub-layer index (sweep * n_classes + class) of every slot."""
        return tuple(r * self.n_classes + k
                     for r in range(self.sweeps)
                     for k, cls in enumerate(self.classes) for _ in cls)

    @cached_property
    def pairs_array(self) -> np.ndarray:
        return np.array(self.flat, dtype=np.int64).reshape(-1, 2)

    def with_sweeps(self, sweeps: int) -> "GeneratorSchedule":
        return GeneratorSchedule(self.classes, sweeps)


def greedy_edge_coloring(edges) -> dict:
    """Lexicographic greedy: each edge takes the smallest color free at both ends."""
    at = {}
    colors = {}
    for e in sorted(edges):
        i, j = e
        busy = at.setdefault(i, set()) | at.setdefault(j, set())
        c = 0
        while c in busy:
            c += 1
        colors[e] = c
        at[i].add(c)
        at[j].add(c)
    return colors


def misra_gries_edge_coloring(edges) -> dict:
    """Proper edge coloring with at most max_degree + 1 colors."""
    edges = sorted(edges)
    nb: dict = {}
    for i, j in edges:
        nb.setdefault(i, []).append(j)
        nb.setdefault(j, []).append(i)
    delta = max(len(v) for v in nb.values())
    palette = range(delta + 1)
    col: dict = {}

    def key(a, b):
        return (a, b) if a < b else (b, a)

    def color_of(a, b):
        return col.get(key(a, b))

    def free(x, c):
        return all(color_of(x, y) != c for y in nb[x])

    def first_free(x):
        return next(c for c in palette if free(x, c))

    def is_fan(u, fan):
        for a, b in zip(fan, fan[1:]):
            cb = color_of(u, b)
            if cb is None or not free(a, cb):
                return False
        return True

    for u, v in edges:
        fan = [v]
        in_fan = {v}
        grown = True
        while grown:
            grown = False
            for x in nb[u]:
                if x in in_fan:
                    continue
                cx = color_of(u, x)
                if cx is not None and free(fan[-1], cx):
                    fan.append(x)
                    in_fan.add(x)
                    grown = True
                    break
        c = first_free(u)
        d = first_free(fan[-1])
        if c != d:
            # invert the c/d alternating path that leaves u along color d
            path = []
            x, want = u, d
            prev = None
            while True:
                nxt = next((y for y in nb[x] if y != prev and color_of(x, y) == want), None)
                if nxt is None:
                    break
                path.append(key(x, nxt))
                prev, x = x, nxt
                want = c if want == d else d
            for e in path:
                col[e] = c if col[e] == d else d
        w = next(k for k in range(len(fan))
                 if free(fan[k], d) and is_fan(u, fan[:k + 1]))
        for k in range(w):
            col[key(u, fan[k])] = col[key(u, fan[k + 1])]
        col[key(u, fan[w])] = d
    return col


def _classes(colors) -> tuple:
    n = max(colors.values()) + 1
    out = [[] for _ in range(n)]
    for e, c in colors.items():
        out[c].append(e)
    return tuple(tuple(sorted(c)) for c in out if c)


def partition_generators(topology: Topology, sweeps: int = 1) -> GeneratorSchedule:
    """Greedy coloring, repaired with Misra-Gries if it overshoots max_degree + 1."""
    if sweeps < 1:
        raise ContractError("sweeps must be >= 1")
    edges = topology.sorted_edges()
    colors = greedy_edge_coloring(edges)
    if max(colors.values()) + 1 > topology.max_degree + 1:
        colors = misra_gries_edge_coloring(edges)
    return GeneratorSchedule(_classes(colors), sweeps)
