"""Circuit generators, routing metrics, eCDFs, and SVG/CSV emitters.

The benchmark grid is run by ``run_protocol``; records come back sorted by
``(family, qubits, layers, seed, config_hash)`` so output never depends on
execution order.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import time
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .circuit import LayeredCircuit, Topology, layerize, topology_line, topology_ring
from .errors import ContractError, MetricsError, RoutingError
from .router import RoutedCircuit, RouterConfig, route

log = logging.getLogger(__name__)

CNOTS_PER_GATE = 3
CNOTS_PER_SWAP = 3


# --- generators -------------------------------------------------------------

def gen_matching_circuit(m: int, T: int, seed: int) -> LayeredCircuit:
    """QV-like: every layer is a random maximum matching (shuffle, pair neighbours)."""
    if m < 2:
        raise ContractError("matching circuits need m >= 2")
    if T < 0:
        raise ContractError("T must be >= 0")
    rng = np.random.default_rng(seed)
    layers = []
    for _ in range(T):
        p = rng.permutation(m)
        layers.append([(int(p[2 * k]), int(p[2 * k + 1])) for k in range(m // 2)])
    return LayeredCircuit.from_layers(m, layers)


def gen_sparse_circuit(m: int, n_gates: int, seed: int) -> LayeredCircuit:
    """MCX-like: a chain of gates where each one reuses a qubit of its predecessor."""
    if m < 2:
        raise ContractError("sparse circuits need m >= 2")
    if n_gates < 0:
        raise ContractError("n_gates must be >= 0")
    rng = np.random.default_rng(seed)
    gates = []
    for k in range(n_gates):
        if k == 0:
            a, b = (int(x) for x in rng.choice(m, size=2, replace=False))
        else:
            pa, pb = gates[-1]
            keep = pa if rng.random() < 0.5 else pb
            other = pb if keep == pa else pa
            pool = [q for q in range(m) if q != keep and (q != other or m == 2)]
            a, b = keep, int(pool[rng.integers(len(pool))])
        gates.append((a, b))
    return layerize(m, gates)


GENERATORS = {"qv": gen_matching_circuit, "mcx": gen_sparse_circuit}


# --- metrics --------------------------------------------------------------

@dataclass
class MetricsRecord:
    family: str
    qubits: int
    layers: int
    seed: int
    coupling: str
    horizon: int
    max_optim_steps: int
    config_hash: str
    swaps: int
    cnots_before: int
    cnots_after: int
    depth_before: int
    depth_after: int
    dcnots: float
    ddepth: float
    merit: float
    wall_time: float | None = None
    config: dict = field(default_factory=dict, repr=False)

    def sort_key(self):
        return (self.family, self.qubits, self.layers, self.seed, self.config_hash)

    def as_dict(self, timing: bool = False) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "config"}
        if not timing:
            d.pop("wall_time")
        return d


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def compute_metrics(original: LayeredCircuit, routed: RoutedCircuit,
                    cnot_cost_per_gate: int = CNOTS_PER_GATE,
                    cnot_cost_per_swap: int = CNOTS_PER_SWAP, *,
                    family: str = "", seed: int = 0, wall_time=None) -> MetricsRecord:
    """Relative CNOT and depth increase of a routing, plus their sum."""
    c0 = original.n_gates * cnot_cost_per_gate
    if c0 == 0:
        raise MetricsError("original circuit has no CNOT cost; relative measures undefined")
    swaps = routed.swaps_inserted
    cs = c0 + swaps * cnot_cost_per_swap
    d0 = original.depth
    ds = d0 + routed.swap_depth
    dcnots = (cs - c0) / c0
    ddepth = (ds - d0) / d0
    cfg = dict(routed.config)
    return MetricsRecord(
        family=family, qubits=original.m, layers=d0, seed=seed,
        coupling=str(cfg.get("coupling", "")), horizon=int(cfg.get("horizon", 0)),
        max_optim_steps=int(cfg.get("max_optim_steps", 0)), config_hash=config_hash(cfg),
        swaps=swaps, cnots_before=c0, cnots_after=cs, depth_before=d0, depth_after=ds,
        dcnots=dcnots, ddepth=ddepth, merit=dcnots + ddepth, wall_time=wall_time, config=cfg)


def ecdf(samples) -> list:
    """Right-continuous empirical CDF as sorted ``(value, P[X <= value])`` pairs."""
    x = np.asarray(list(samples), dtype=np.float64)
    if x.size == 0:
        raise ValueError("ecdf of an empty sample")
    values, counts = np.unique(x, return_counts=True)
    frac = np.cumsum(counts) / x.size
    frac[-1] = 1.0
    return [(float(v), float(f)) for v, f in zip(values, frac)]


# --- emitters -------------------------------------------------------------

_PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def emit_braid_svg(routed: RoutedCircuit) -> str:
    """Braid diagram: one strand per physical position, one crossing per swap.

    Strands are coloured by the logical qubit they carry. Gate layers draw a
    vertical bar between the two physical qubits.
    """
    m = routed.m
    pitch, swap_w, gate_w, pad = 20, 30, 24, 20

    def y(q):
        return pad + pitch * q

    columns = []  # ("swap", pairs) | ("gate", gates)
    for layer in routed.layers:
        columns += [("swap", sub) for sub in layer.swaps]
        columns.append(("gate", layer.gates))
    columns += [("swap", sub) for sub in routed.restore_swaps]
    width = 2 * pad + sum(swap_w if kind == "swap" else gate_w for kind, _ in columns)
    height = 2 * pad + pitch * (m - 1)
    at = list(range(m))  # physical -> logical
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           '<g fill="none" stroke-width="2">']

    def strand(x0, x1, p0, p1, logical, cls="strand"):
        color = _PALETTE[logical % len(_PALETTE)]
        return (f'<line class="{cls}" x1="{x0}" y1="{y(p0)}" x2="{x1}" y2="{y(p1)}" '
                f'stroke="{color}"/>')

    x = pad
    for kind, payload in columns:
        if kind == "swap":
            moved = set()
            for i, j in payload:
                out.append(f'<g class="swap" data-pair="{i},{j}">')
                out.append(strand(x, x + swap_w, i, j, at[i], "cross"))
                out.append(strand(x, x + swap_w, j, i, at[j], "cross"))
                out.append("</g>")
                moved.update((i, j))
            for p in range(m):
                if p not in moved:
                    out.append(strand(x, x + swap_w, p, p, at[p]))
            for i, j in payload:
                at[i], at[j] = at[j], at[i]
            x += swap_w
        else:
            for p in range(m):
                out.append(strand(x, x + gate_w, p, p, at[p]))
            cx = x + gate_w // 2
            for g in payload:
                lo, hi = sorted(g.pair)
                out.append(f'<line class="gate" x1="{cx}" y1="{y(lo)}" x2="{cx}" y2="{y(hi)}" '
                           f'stroke="#000"/>')
            x += gate_w
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_csv(records, timing: bool = False) -> str:
    """CSV with one row per record; ``wall_time`` only when ``timing`` is set."""
    names = [f.name for f in fields(MetricsRecord) if f.name != "config"]
    if not timing:
        names.remove("wall_time")
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=names, lineterminator="\n")
    w.writeheader()
    for r in records:
        row = r.as_dict(timing)
        for k in ("dcnots", "ddepth", "merit", "wall_time"):
            if k in row and row[k] is not None:
                row[k] = repr(float(row[k]))
        w.writerow(row)
    return buf.getvalue()


# --- protocols ------------------------------------------------------------

@dataclass(frozen=True)
class Protocol:
    name: str
    families: tuple
    qubits: tuple
    instances: int
    horizons: tuple
    steps: tuple
    couplings: tuple = ("line",)


PROTOCOLS = {
    "paper-study": Protocol("paper-study", ("qv",), (5, 6, 7, 8), 50, (1, 2, 4), (10, 30, 100)),
    "quick": Protocol("quick", ("qv", "mcx"), (4, 5), 3, (1, 4), (30,), ("line", "ring")),
}


def _instance(family: str, m: int, seed: int) -> LayeredCircuit:
    # QV circuits are square (m layers); MCX chains get 2m gates
    if family == "qv":
        return gen_matching_circuit(m, m, seed)
    return gen_sparse_circuit(m, 2 * m, seed)


def _topology(kind: str, m: int) -> Topology:
    return topology_ring(m) if kind == "ring" else topology_line(m)


def run_protocol(name: str, seed: int = 0, instances: int | None = None,
                 base: RouterConfig = RouterConfig(), failures: list | None = None) -> list:
    """Route every (instance, horizon, steps) combination of a preset grid.

    Instance ``k`` uses generator seed ``seed + k``; the knitter seed is the
    same, so each record is reproducible on its own. Routings that fail are
    left out of the records; pass a list as ``failures`` to collect them as
    ``(family, qubits, coupling, seed, horizon, steps, layer)`` tuples.
    """
    if name not in PROTOCOLS:
        raise ContractError(f"unknown protocol {name!r}; choose from {sorted(PROTOCOLS)}")
    p = PROTOCOLS[name]
    n = p.instances if instances is None else instances
    records = []
    for family in p.families:
        for m in p.qubits:
            for kind in p.couplings:
                top = _topology(kind, m)
                for k in range(n):
                    s = seed + k
                    c = _instance(family, m, s)
                    for h in p.horizons:
                        for steps in p.steps:
                            kc = replace(base.knitter, max_optim_steps=steps, seed=s)
                            cfg = replace(base, horizon=h, knitter=kc)
                            t0 = time.perf_counter()
                            try:
                                r = route(c, top, cfg)
                            except RoutingError as exc:
                                log.warning("%s m=%d seed=%d h=%d steps=%d: %s",
                                            family, m, s, h, steps, exc)
                                if failures is not None:
                                    failures.append((family, m, top.name, s, h, steps, exc.layer))
                                continue
                            dt = time.perf_counter() - t0
                            records.append(compute_metrics(c, r, family=family, seed=s,
                                                           wall_time=dt))
    records.sort(key=MetricsRecord.sort_key)
    return records


def summarize(records, by=("horizon", "max_optim_steps")) -> dict:
    """Mean dcnots, ddepth and merit per group."""
    groups: dict = {}
    for r in records:
        groups.setdefault(tuple(getattr(r, k) for k in by), []).append(r)
    return {key: {"n": len(rs),
                  "dcnots": float(np.mean([r.dcnots for r in rs])),
                  "ddepth": float(np.mean([r.ddepth for r in rs])),
                  "merit": float(np.mean([r.merit for r in rs]))}
            for key, rs in sorted(groups.items())}
