"""Hardware cost over PSSWAP compositions and its parameter-shift gradient.

Slot convention: inside a layer, slot ``s`` runs in schedule order, so the
layer operator is ``P = U_{S-1} ... U_1 U_0`` and slot 0 acts first on the
circuit. The window composite is ``K_t = P_t K_{t-1}``.

Two evaluation routes exist on purpose. ``hardware_cost_dense`` builds every
``K_t`` as an m^2 x m^2 matrix and is only meant as a reference;
``CostContext.evaluate`` runs the O(m)-per-slot kernels.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels
from .circuit import LayeredCircuit, Topology
from .coloring import GeneratorSchedule
from .errors import ContractError, ShapeError
from .tensor import PermutationMatrix, identity, kron, swap_matrix, vec

DEFAULT_BETA = 0.25


def layer_cost(p, g, mc) -> float:
    """``1^T [(P G P^T) o M_c] 1``. Twice the number of gates landing off-edge."""
    pd = p.dense() if isinstance(p, PermutationMatrix) else np.asarray(p, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    mc = np.asarray(mc, dtype=np.float64)
    if not (pd.shape == g.shape == mc.shape) or pd.ndim != 2:
        raise ShapeError(f"shape mismatch {pd.shape}, {g.shape}, {mc.shape}")
    return float(np.sum((pd @ g @ pd.T) * mc))


def layer_cost_tensor(p, g, mc) -> float:
    """Same value through ``vec(M_c)^T (P kron P) vec(G)``."""
    pd = p.dense() if isinstance(p, PermutationMatrix) else np.asarray(p, dtype=np.float64)
    if not (pd.shape == np.shape(g) == np.shape(mc)):
        raise ShapeError("shape mismatch")
    return float(vec(mc) @ kron(pd, pd) @ vec(g))


def violations(p: PermutationMatrix, layer, topology: Topology) -> int:
    """Integer count of gates in ``layer`` that ``p`` maps off the coupling graph."""
    return sum(1 for a, b in layer if not topology.has_edge(p(a), p(b)))


def _check_matching(pairs, thetas):
    used = set()
    for i, j in pairs:
        if i in used or j in used:
            raise ContractError(f"class {list(pairs)} is not a matching")
        used.update((i, j))
    if len(thetas) != len(pairs):
        raise ContractError("one angle per pair required")


def sswap_class_layer(pairs, thetas, m: int) -> np.ndarray:
    """``I + sum_i sin^2(theta_i) (S_i - I)``: the product of the class's m x m smooth swaps.

    Exact because disjoint transpositions satisfy ``S_a S_b = S_a + S_b - I``.
    """
    _check_matching(pairs, thetas)
    eye = identity(m)
    out = eye.copy()
    for (i, j), th in zip(pairs, thetas):
        out += np.sin(th) ** 2 * (swap_matrix(m, i, j).dense() - eye)
    return out


def psswap_class_layer(pairs, thetas, m: int) -> np.ndarray:
    """Product of the class's PSSWAPs on the m^2 space (factors commute).

    The sum shortcut used for ``sswap_class_layer`` does not carry over here:
    ``S_a kron S_a`` and ``S_b kron S_b`` move overlapping index pairs such as
    ``(a0, b0)``, and the sum form even has negative entries at the vertices.
    """
    _check_matching(pairs, thetas)
    eye = identity(m * m)
    out = eye.copy()
    for (i, j), th in zip(pairs, thetas):
        s = swap_matrix(m, i, j).dense()
        out = (eye + np.sin(th) ** 2 * (kron(s, s) - eye)) @ out
    return out


def layer_operator_dense(schedule: GeneratorSchedule, thetas, m: int) -> np.ndarray:
    """Dense ``P_t`` for one layer's ``S`` angles, one class layer per sub-layer."""
    thetas = np.asarray(thetas, dtype=np.float64)
    groups = schedule.slot_group
    op = identity(m * m)
    s = 0
    while s < schedule.S:
        g = groups[s]
        e = s
        while e < schedule.S and groups[e] == g:
            e += 1
        op = psswap_class_layer(schedule.flat[s:e], thetas[s:e], m) @ op
        s = e
    return op


def betas(gamma: float, n: int) -> np.ndarray:
    return gamma ** np.arange(n, dtype=np.float64)


@dataclass(frozen=True)
class CostContext:
    topology: Topology
    circuit: LayeredCircuit
    schedule: GeneratorSchedule
    beta: float = DEFAULT_BETA
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.circuit.m != self.topology.m:
            raise ContractError(f"circuit has {self.circuit.m} qubits, topology {self.topology.m}")
        if not 0.0 < self.beta <= 1.0:
            raise ContractError("beta decay must lie in (0, 1]")

    @property
    def m(self) -> int:
        return self.topology.m

    @property
    def T(self) -> int:
        return self.circuit.depth

    @property
    def S(self) -> int:
        return self.schedule.S

    @property
    def n_params(self) -> int:
        return self.S * self.T

    @cached_property
    def mc(self) -> np.ndarray:
        return self.topology.complement

    @cached_property
    def gs(self) -> np.ndarray:
        return self.circuit.adjacency_stack()

    @cached_property
    def betas(self) -> np.ndarray:
        return betas(self.beta, self.T)

    def _check(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64).reshape(-1)
        if theta.size != self.n_params:
            raise ContractError(f"theta has {theta.size} entries, expected {self.n_params}")
        return theta

    def terms(self, theta) -> np.ndarray:
        return kernels.cost_terms(self.mc, self.gs, self.betas, self.schedule.pairs_array,
                                  self._check(theta))

    def __call__(self, theta) -> float:
        return float(self.terms(theta).sum())

    def evaluate(self, theta):
        """``(total, per-layer terms, gradient)`` in a single pass."""
        terms, grad = kernels.cost_and_grad(self.mc, self.gs, self.betas,
                                            self.schedule.pairs_array, self._check(theta))
        return float(terms.sum()), terms, grad

    def gradient(self, theta) -> np.ndarray:
        return self.evaluate(theta)[2]


def hardware_cost(ctx: CostContext, theta):
    """Total cost and per-layer terms (fast path)."""
    terms = ctx.terms(theta)
    return float(terms.sum()), terms


def gradient(ctx: CostContext, theta) -> np.ndarray:
    return ctx.gradient(theta)


def build_composites(ctx: CostContext, theta) -> list:
    """Dense ``K_0 .. K_{T-1}`` (m^2 x m^2). Reference route; quadratic memory."""
    theta = ctx._check(theta)
    S = ctx.S
    out = []
    k = None
    for t in range(ctx.T):
        p = layer_operator_dense(ctx.schedule, theta[t * S:(t + 1) * S], ctx.m)
        k = p if k is None else p @ k
        out.append(k)
    return out


def hardware_cost_dense(ctx: CostContext, theta):
    ks = build_composites(ctx, theta)
    vm = vec(ctx.mc)
    terms = np.array([ctx.betas[t] * (vm @ ks[t] @ vec(ctx.gs[t])) for t in range(ctx.T)])
    return float(terms.sum()), terms


def shift_gradient(ctx: CostContext, theta) -> np.ndarray:
    """Literal parameter-shift rule, two cost evaluations per slot."""
    theta = ctx._check(theta)
    out = np.empty_like(theta)
    for q in range(theta.size):
        up = theta.copy()
        dn = theta.copy()
        up[q] += np.pi / 4
        dn[q] -= np.pi / 4
        out[q] = ctx(up) - ctx(dn)
    return out
