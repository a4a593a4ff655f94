"""Circuit and hardware-topology data model, plus JSON I/O."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .errors import ContractError, ParseError, TopologyError
from .tensor import MAX_QUBITS, PermutationMatrix

QubitMap = PermutationMatrix


@dataclass(frozen=True)
class Gate:
    """Two-qubit gate. Orientation and label are payload; routing ignores both."""

    q0: int
    q1: int
    label: str | None = None
    pos: int = 0  # program-order index

    @property
    def pair(self) -> tuple[int, int]:
        return (self.q0, self.q1)

    @property
    def key(self) -> tuple[int, int]:
        return (min(self.q0, self.q1), max(self.q0, self.q1))


@dataclass(frozen=True)
class LayeredCircuit:
    m: int
    layers: tuple  # tuple[tuple[Gate, ...], ...]

    def __post_init__(self):
        for t, layer in enumerate(self.layers):
            seen = set()
            for g in layer:
                for q in g.pair:
                    if not 0 <= q < self.m:
                        raise ContractError(f"layer {t}: qubit {q} out of range for m={self.m}")
                    if q in seen:
                        raise ContractError(f"layer {t}: qubit {q} used twice")
                    seen.add(q)

    @classmethod
    def from_layers(cls, m, layers) -> "LayeredCircuit":
        """Build from nested pair lists; program order follows the layer order."""
        out, pos = [], 0
        for layer in layers:
            gl = []
            for pair in layer:
                gl.append(Gate(int(pair[0]), int(pair[1]), pos=pos))
                pos += 1
            out.append(tuple(gl))
        return cls(m, tuple(out))

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def n_gates(self) -> int:
        return sum(len(layer) for layer in self.layers)

    def pairs(self):
        return [[g.pair for g in layer] for layer in self.layers]

    def gates(self):
        """All gates in program order."""
        return sorted((g for layer in self.layers for g in layer), key=lambda g: g.pos)

    def adjacency(self, t: int) -> np.ndarray:
        g = np.zeros((self.m, self.m))
        for gate in self.layers[t]:
            g[gate.q0, gate.q1] = g[gate.q1, gate.q0] = 1.0
        return g

    def adjacency_stack(self, start: int = 0, stop: int | None = None) -> np.ndarray:
        stop = self.depth if stop is None else stop
        if stop <= start:
            return np.zeros((0, self.m, self.m))
        return np.stack([self.adjacency(t) for t in range(start, stop)])

    def slice(self, start: int, stop: int) -> "LayeredCircuit":
        return LayeredCircuit(self.m, self.layers[start:stop])

    def padded(self, m: int) -> "LayeredCircuit":
        """Same gates on a larger register; the extra qubits stay idle."""
        if m < self.m:
            raise ContractError(f"cannot shrink register from {self.m} to {m}")
        return LayeredCircuit(m, self.layers)


def layerize(m: int, gates, labels=None) -> LayeredCircuit:
    """ASAP packing: each gate lands one layer after the latest layer touching its qubits."""
    if labels is not None and len(labels) != len(gates):
        raise ContractError("labels must parallel gates")
    frontier = [0] * m
    layers: list[list[Gate]] = []
    for pos, pair in enumerate(gates):
        a, b = int(pair[0]), int(pair[1])
        if not (0 <= a < m and 0 <= b < m):
            raise ContractError(f"gate {pos}: qubit index out of range for m={m}")
        if a == b:
            raise ContractError(f"gate {pos}: degenerate gate on qubit {a}")
        t = max(frontier[a], frontier[b])
        if t == len(layers):
            layers.append([])
        layers[t].append(Gate(a, b, None if labels is None else labels[pos], pos))
        frontier[a] = frontier[b] = t + 1
    return LayeredCircuit(m, tuple(tuple(layer) for layer in layers))


def apply_permutation(c: LayeredCircuit, p: QubitMap) -> LayeredCircuit:
    """Relabel every gate (a, b) -> (p(a), p(b)); layering and payloads kept."""
    if p.size != c.m:
        raise ContractError(f"map size {p.size} != circuit size {c.m}")
    return LayeredCircuit(c.m, tuple(
        tuple(replace(g, q0=p(g.q0), q1=p(g.q1)) for g in layer) for layer in c.layers))


# --- topology -------------------------------------------------------------

@dataclass(frozen=True)
class Topology:
    m: int
    edges: frozenset  # of (i, j) with i < j
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        if self.m < 2 or self.m > MAX_QUBITS:
            raise TopologyError(f"qubit count {self.m} outside 2..{MAX_QUBITS}")
        norm = set()
        for e in self.edges:
            i, j = int(e[0]), int(e[1])
            if i == j or not (0 <= i < self.m and 0 <= j < self.m):
                raise TopologyError(f"bad edge {tuple(e)} for m={self.m}")
            norm.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(norm))
        if len(norm) == self.m * (self.m - 1) // 2:
            raise TopologyError("coupling graph is complete; nothing to route")
        if not _connected(self.m, norm):
            raise TopologyError("coupling graph is disconnected")

    @cached_property
    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.m, self.m))
        for i, j in self.edges:
            a[i, j] = a[j, i] = 1.0
        return a

    @cached_property
    def complement(self) -> np.ndarray:
        mc = 1.0 - self.adjacency
        np.fill_diagonal(mc, 0.0)
        return mc

    @cached_property
    def neighbors(self) -> tuple:
        nb = [[] for _ in range(self.m)]
        for i, j in sorted(self.edges):
            nb[i].append(j)
            nb[j].append(i)
        return tuple(tuple(x) for x in nb)

    @property
    def max_degree(self) -> int:
        return max(len(n) for n in self.neighbors)

    def has_edge(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges

    def sorted_edges(self):
        return sorted(self.edges)

    def to_json(self) -> dict:
        return {"qubits": self.m, "edges": [list(e) for e in self.sorted_edges()]}


def _connected(m, edges) -> bool:
    nb = [[] for _ in range(m)]
    for i, j in edges:
        nb[i].append(j)
        nb[j].append(i)
    seen = {0}
    todo = deque([0])
    while todo:
        v = todo.popleft()
        for w in nb[v]:
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return len(seen) == m


def topology_from_edges(m: int, edges, name: str = "custom") -> Topology:
    return Topology(m, frozenset(tuple(e) for e in edges), name)


def topology_line(m: int) -> Topology:
    if m < 3:
        raise TopologyError("line topology needs m >= 3")
    return Topology(m, frozenset((k, k + 1) for k in range(m - 1)), f"line:{m}")


def topology_ring(m: int) -> Topology:
    if m < 3:
        raise TopologyError("ring topology needs m >= 3")
    edges = {(k, k + 1) for k in range(m - 1)} | {(0, m - 1)}
    return Topology(m, frozenset(edges), f"ring:{m}")


def topology_heavy_hex(cells: int) -> Topology:
    """A row of ``cells`` hexagons, every hexagon edge carrying an extra qubit.

    Vertex qubits come first (top row, then bottom row), followed by one
    qubit per hexagon edge. Gives 9*cells + 3 qubits, maximum degree 3.
    """
    if cells < 1:
        raise TopologyError("heavy-hex needs at least one cell")
    width = 2 * cells + 1
    top = list(range(width))
    bottom = list(range(width, 2 * width))
    base = [(top[k], top[k + 1]) for k in range(width - 1)]
    base += [(bottom[k], bottom[k + 1]) for k in range(width - 1)]
    base += [(top[k], bottom[k]) for k in range(0, width, 2)]
    edges = []
    nxt = 2 * width
    for a, b in base:
        edges += [(a, nxt), (nxt, b)]
        nxt += 1
    return Topology(nxt, frozenset(edges), f"heavyhex:{cells}")


def parse_coupling(source) -> Topology:
    """``line:m``, ``ring:m``, ``heavyhex:cells``, or a topology JSON file path/dict."""
    if isinstance(source, dict):
        return _topology_from_json(source)
    text = str(source).strip()
    kind, sep, arg = text.partition(":")
    if sep and kind in ("line", "ring", "heavyhex"):
        try:
            n = int(arg)
        except ValueError:
            raise ParseError(f"expected an integer after '{kind}:'", context="coupling") from None
        return {"line": topology_line, "ring": topology_ring,
                "heavyhex": topology_heavy_hex}[kind](n)
    try:
        with open(text) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read coupling file: {exc}", context="coupling") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON at line {exc.lineno}: {exc.msg}", context="coupling") from None
    return _topology_from_json(doc)


def _topology_from_json(doc) -> Topology:
    if not isinstance(doc, dict) or "qubits" not in doc or "edges" not in doc:
        raise ParseError("expected an object with 'qubits' and 'edges'", context="coupling")
    m = doc["qubits"]
    if not isinstance(m, int) or isinstance(m, bool):
        raise ParseError("must be an integer", context="qubits")
    edges = []
    for k, e in enumerate(doc["edges"]):
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(q, int) for q in e)):
            raise ParseError("edge must be a pair of integers", context=f"edges[{k}]")
        edges.append(tuple(e))
    return topology_from_edges(m, edges)


# --- circuit JSON ---------------------------------------------------------

def parse_circuit(text: str) -> LayeredCircuit:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON at line {exc.lineno} col {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    m = doc.get("qubits")
    if not isinstance(m, int) or isinstance(m, bool) or m < 2:
        raise ParseError("must be an integer >= 2", context="qubits")
    gates = doc.get("gates")
    if not isinstance(gates, list):
        raise ParseError("must be a list of [int, int] pairs", context="gates")
    pairs = []
    for k, g in enumerate(gates):
        ctx = f"gates[{k}]"
        if not (isinstance(g, list) and len(g) == 2):
            raise ParseError("expected [int, int]", context=ctx)
        if not all(isinstance(q, int) and not isinstance(q, bool) for q in g):
            raise ParseError("qubit indices must be integers", context=ctx)
        if not all(0 <= q < m for q in g):
            raise ParseError(f"qubit out of range 0..{m - 1}", context=ctx)
        if g[0] == g[1]:
            raise ParseError(f"duplicate qubit {g[0]} in gate", context=ctx)
        pairs.append((g[0], g[1]))
    labels = doc.get("labels")
    if labels is not None:
        if not (isinstance(labels, list) and len(labels) == len(pairs)
                and all(isinstance(s, str) for s in labels)):
            raise ParseError("must be a list of strings parallel to 'gates'", context="labels")
    return layerize(m, pairs, labels)


def circuit_to_json(c: LayeredCircuit) -> dict:
    gates = c.gates()
    doc = {"qubits": c.m, "gates": [list(g.pair) for g in gates]}
    if any(g.label is not None for g in gates):
        doc["labels"] = [g.label if g.label is not None else "" for g in gates]
    return doc


def emit_circuit(c: LayeredCircuit) -> str:
    return json.dumps(circuit_to_json(c))
