"""Rolling-horizon swap mapping over a layered circuit."""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import asdict, dataclass, field, replace

from .circuit import Gate, LayeredCircuit, Topology, apply_permutation
from .coloring import GeneratorSchedule, partition_generators
from .cost import DEFAULT_BETA
from .errors import ContractError, ParseError, RoutingError
from .optimizer import KnitterConfig, knitter
from .swaps import swaps_to_perm, thetas_to_swaps
from .tensor import PermutationMatrix

__all__ = ["RouterConfig", "RoutedLayer", "RoutedCircuit", "route", "verify_routing",
           "thetas_to_swaps", "restore_identity_swaps", "VerifyReport"]

log = logging.getLogger(__name__)

FALLBACKS = ("fail", "retry")


@dataclass(frozen=True)
class RouterConfig:
    horizon: int = 4
    sweeps: int = 1
    beta: float = DEFAULT_BETA
    fallback: str = "retry"
    max_escalations: int = 3
    undo_final_permutation: bool = False
    knitter: KnitterConfig = field(default_factory=KnitterConfig)

    def __post_init__(self):
        if self.horizon < 1:
            raise ContractError("horizon must be >= 1")
        if self.sweeps < 1:
            raise ContractError("sweeps must be >= 1")
        if self.fallback not in FALLBACKS:
            raise ContractError(f"fallback must be one of {FALLBACKS}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(d.pop("knitter"))
        return d


@dataclass(frozen=True)
class RoutedLayer:
    swaps: tuple  # sub-layers of disjoint physical pairs, in execution order
    gates: tuple  # physical gates, payload kept
    layout: PermutationMatrix  # logical -> physical after this layer's swaps


@dataclass
class RoutedCircuit:
    m: int
    layers: list
    restore_swaps: tuple = ()
    config: dict = field(default_factory=dict)
    windows: int = 0

    @property
    def final_permutation(self) -> PermutationMatrix:
        p = self.layers[-1].layout if self.layers else PermutationMatrix.identity(self.m)
        if self.restore_swaps:
            p = swaps_to_perm(self.m, self.restore_swaps) @ p
        return p

    @property
    def swaps_inserted(self) -> int:
        return (sum(len(s) for layer in self.layers for s in layer.swaps)
                + sum(len(s) for s in self.restore_swaps))

    @property
    def swap_depth(self) -> int:
        return sum(len(layer.swaps) for layer in self.layers) + len(self.restore_swaps)

    @property
    def depth(self) -> int:
        return len(self.layers) + self.swap_depth

    def to_json(self, metrics=None) -> dict:
        program = []
        for layer in self.layers:
            entry = {
                "swaps": [[list(p) for p in sub] for sub in layer.swaps],
                "gates": [list(g.pair) for g in layer.gates],
                "layout": list(layer.layout.mapping),
            }
            if any(g.label is not None for g in layer.gates):
                entry["labels"] = [g.label or "" for g in layer.gates]
            program.append(entry)
        doc = {"qubits": self.m, "program": program}
        if self.restore_swaps:
            doc["restore_swaps"] = [[list(p) for p in sub] for sub in self.restore_swaps]
        doc["final_permutation"] = list(self.final_permutation.mapping)
        doc["metrics"] = dict(metrics) if metrics is not None else {
            "swaps": self.swaps_inserted, "swap_depth": self.swap_depth}
        doc["config"] = dict(self.config)
        return doc

    @classmethod
    def from_json(cls, doc) -> "RoutedCircuit":
        try:
            m = int(doc["qubits"])
            layers = []
            for k, entry in enumerate(doc["program"]):
                labels = entry.get("labels")
                gates = tuple(
                    Gate(int(a), int(b), (labels[n] or None) if labels else None, n)
                    for n, (a, b) in enumerate(entry["gates"]))
                swaps = tuple(tuple((int(i), int(j)) for i, j in sub) for sub in entry["swaps"])
                layers.append(RoutedLayer(swaps, gates, PermutationMatrix(tuple(entry["layout"]))))
            restore = tuple(tuple((int(i), int(j)) for i, j in sub)
                            for sub in doc.get("restore_swaps", []))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed routed circuit: {exc}", context="routed") from None
        return cls(m, layers, restore, dict(doc.get("config", {})))


def _solve_window(window, topology, base: GeneratorSchedule, cfg: RouterConfig, start: int):
    levels = cfg.max_escalations + 1 if cfg.fallback == "retry" else 1
    for esc in range(levels):
        sched = base.with_sweeps(base.sweeps + esc)
        kcfg = cfg.knitter
        if esc:
            kcfg = replace(kcfg, max_trials=kcfg.max_trials * 2 ** esc, keep_best_iterate=True)
        res = knitter(window, topology, sched, kcfg, cfg.beta, key=(start, esc))
        if res.theta_star is not None:
            if esc:
                log.info("window at layer %d solved after %d escalation(s)", start, esc)
            return res, sched
    raise RoutingError(f"no feasible layer found for the window starting at layer {start}",
                       layer=start)


def route(c: LayeredCircuit, topology: Topology, config: RouterConfig = RouterConfig()) -> RoutedCircuit:
    if c.m != topology.m:
        raise ContractError(f"circuit has {c.m} qubits, topology has {topology.m}")
    base = partition_generators(topology, config.sweeps)
    layout = PermutationMatrix.identity(c.m)
    out: list[RoutedLayer] = []
    t = 0
    windows = 0
    while t < c.depth:
        h = min(config.horizon, c.depth - t)
        window = apply_permutation(c.slice(t, t + h), layout)
        res, sched = _solve_window(window, topology, base, config, t)
        windows += 1
        for k, ls in enumerate(thetas_to_swaps(res.theta_star, sched, c.m)):
            layout = ls.perm @ layout
            gates = tuple(replace(g, q0=layout(g.q0), q1=layout(g.q1)) for g in c.layers[t + k])
            out.append(RoutedLayer(ls.sublayers, gates, layout))
        t += res.feasible_layers
    restore = ()
    if config.undo_final_permutation:
        restore = restore_identity_swaps(layout, topology)
    meta = {"coupling": topology.name, **config.to_dict()}
    return RoutedCircuit(c.m, out, restore, meta, windows)


def restore_identity_swaps(layout: PermutationMatrix, topology: Topology) -> tuple:
    """Coupling-edge swaps that bring every logical qubit back to its own index.

    Tokens are parked leaf-first along a BFS spanning tree, so the rest of the
    tree stays connected; the swap list is then packed into parallel sub-layers.
    """
    m = topology.m
    where = list(layout.mapping)  # logical -> physical
    at = [0] * m  # physical -> logical
    for q, p in enumerate(where):
        at[p] = q
    parent = [-1] * m
    depth = [0] * m
    seen = [False] * m
    seen[0] = True
    order = []
    todo = deque([0])
    while todo:
        v = todo.popleft()
        order.append(v)
        for w in topology.neighbors[v]:
            if not seen[w]:
                seen[w] = True
                parent[w] = v
                depth[w] = depth[v] + 1
                todo.append(w)
    alive = set(range(m))
    seq = []
    for v in sorted(range(m), key=lambda x: (-depth[x], x)):
        # path from where[v] to v inside the remaining tree
        src = where[v]
        path = _tree_path(src, v, parent, depth)
        for a, b in zip(path, path[1:]):
            qa, qb = at[a], at[b]
            at[a], at[b] = qb, qa
            where[qa], where[qb] = b, a
            seq.append((min(a, b), max(a, b)))
        alive.discard(v)
    return _pack(seq)


def _tree_path(a, b, parent, depth):
    left, right = [a], [b]
    while a != b:
        if depth[a] >= depth[b]:
            a = parent[a]
            left.append(a)
        else:
            b = parent[b]
            right.append(b)
    return left[:-1] + right[::-1]


def _pack(seq) -> tuple:
    frontier: dict = {}
    layers: list = []
    for i, j in seq:
        k = max(frontier.get(i, 0), frontier.get(j, 0))
        if k == len(layers):
            layers.append([])
        layers[k].append((i, j))
        frontier[i] = frontier[j] = k + 1
    return tuple(tuple(layer) for layer in layers)


@dataclass
class VerifyReport:
    feasible: bool
    permutation_consistent: bool
    gates_preserved: bool
    swaps: int
    swap_depth: int
    problems: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.feasible and self.permutation_consistent and self.gates_preserved

    def to_json(self) -> dict:
        return {"ok": self.ok, "feasible": self.feasible,
                "permutation_consistent": self.permutation_consistent,
                "gates_preserved": self.gates_preserved, "swaps": self.swaps,
                "swap_depth": self.swap_depth, "problems": list(self.problems)}


def verify_routing(r: RoutedCircuit, topology: Topology, original: LayeredCircuit) -> VerifyReport:
    """Independent replay of a routed circuit against its source."""
    problems = []
    feasible = r.m == topology.m
    if not feasible:
        problems.append(f"routed circuit has {r.m} qubits, topology {topology.m}")

    def check_sublayers(subs, where):
        ok = True
        for s, sub in enumerate(subs):
            used = set()
            for i, j in sub:
                if not topology.has_edge(i, j):
                    problems.append(f"{where}: swap ({i}, {j}) is not a coupling edge")
                    ok = False
                if i in used or j in used:
                    problems.append(f"{where}: sub-layer {s} reuses a qubit")
                    ok = False
                used.update((i, j))
        return ok

    for t, layer in enumerate(r.layers):
        feasible &= check_sublayers(layer.swaps, f"layer {t}")
        for g in layer.gates:
            if not topology.has_edge(g.q0, g.q1):
                problems.append(f"layer {t}: gate {g.pair} is not on a coupling edge")
                feasible = False
    feasible &= check_sublayers(r.restore_swaps, "restore")

    consistent = True
    replay = PermutationMatrix.identity(r.m)
    maps = []
    for t, layer in enumerate(r.layers):
        replay = swaps_to_perm(r.m, layer.swaps) @ replay
        maps.append(replay)
        if layer.layout != replay:
            problems.append(f"layer {t}: stored layout disagrees with replayed swaps")
            consistent = False

    preserved = len(r.layers) == original.depth and original.m == r.m
    if not preserved:
        problems.append(f"layer count {len(r.layers)} vs original {original.depth}")
    else:
        for t, (layer, orig) in enumerate(zip(r.layers, original.layers)):
            c = maps[t]
            want = sorted((c(g.q0), c(g.q1), g.label or "") for g in orig)
            got = sorted((g.q0, g.q1, g.label or "") for g in layer.gates)
            if want != got:
                problems.append(f"layer {t}: emitted gates do not match the original under C_t")
                preserved = False
    return VerifyReport(feasible, consistent, preserved, r.swaps_inserted, r.swap_depth, problems)
