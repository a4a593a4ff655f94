import itertools

import numpy as np
import pytest

from dsmswap.circuit import LayeredCircuit, topology_line, topology_ring
from dsmswap.coloring import partition_generators
from dsmswap.cost import (CostContext, betas, build_composites, gradient, hardware_cost, hardware_cost_dense,
                          layer_cost, layer_cost_tensor, layer_operator_dense, psswap_class_layer,
                          shift_gradient, sswap_class_layer, violations)
from dsmswap.errors import ContractError, ShapeError
from dsmswap.optimizer import realized_maps
from dsmswap.tensor import PermutationMatrix, identity, is_doubly_stochastic, kron, psswap, sswap, swap_matrix

HALF_PI = np.pi / 2


def random_matching_layers(r, m, T):
    out = []
    for _ in range(T):
        p = r.permutation(m)
        k = int(r.integers(0, m // 2 + 1))
        out.append([(int(p[2 * i]), int(p[2 * i + 1])) for i in range(k)])
    return out


def ctx_for(top, layers, sweeps=1, beta=0.5):
    return CostContext(top, LayeredCircuit.from_layers(top.m, layers), partition_generators(top, sweeps), beta)


# --- layer cost -----------------------------------------------------------

def test_layer_cost_seven_qubit_line():
    top = topology_line(7)
    g = LayeredCircuit.from_layers(7, [[(0, 2), (1, 3), (5, 6)]]).adjacency(0)
    assert layer_cost(swap_matrix(7, 1, 2), g, top.complement) == 0
    assert layer_cost(PermutationMatrix.identity(7), g, top.complement) == 4
    assert layer_cost(identity(7), np.zeros((7, 7)), top.complement) == 0


def test_layer_cost_shape_error():
    with pytest.raises(ShapeError):
        layer_cost(identity(3), np.zeros((3, 3)), np.zeros((4, 4)))


def test_layer_cost_two_forms_agree(rng):
    for _ in range(50):
        m = int(rng.integers(2, 7))
        p = rng.permutation(m)
        g = (rng.random((m, m)) < 0.4).astype(float)
        g = np.triu(g, 1)
        g = g + g.T
        mc = rng.uniform(0, 1, (m, m))
        pm = PermutationMatrix(tuple(p))
        assert abs(layer_cost(pm, g, mc) - layer_cost_tensor(pm, g, mc)) <= 1e-10


def test_layer_cost_counts_each_violation_twice(rng):
    top = topology_ring(6)
    for _ in range(30):
        layer = random_matching_layers(rng, 6, 1)[0]
        g = LayeredCircuit.from_layers(6, [layer]).adjacency(0)
        p = PermutationMatrix(tuple(rng.permutation(6)))
        assert layer_cost(p, g, top.complement) == 2 * violations(p, layer, top)


# --- class layers -----------------------------------------------------------

def test_class_layer_examples(rng):
    assert np.array_equal(psswap_class_layer([(0, 1), (2, 3)], [0.0, 0.0], 4), identity(16))
    s = swap_matrix(4, 0, 1).dense()
    assert np.allclose(psswap_class_layer([(0, 1)], [HALF_PI], 4), kron(s, s), atol=1e-15)
    th = rng.uniform(-np.pi, np.pi, 2)
    prod = psswap(5, 0, 3, th[0]) @ psswap(5, 1, 4, th[1])
    assert np.max(np.abs(psswap_class_layer([(0, 3), (1, 4)], th, 5) - prod)) <= 1e-12
    assert is_doubly_stochastic(psswap_class_layer([(0, 3), (1, 4)], th, 5))


def test_sswap_class_sum_form_matches_product(rng):
    for _ in range(100):
        m = int(rng.integers(2, 9))
        p = rng.permutation(m)
        k = int(rng.integers(1, m // 2 + 1))
        pairs = [(int(p[2 * i]), int(p[2 * i + 1])) for i in range(k)]
        th = rng.uniform(-np.pi, np.pi, k)
        prod = identity(m)
        for (i, j), t in zip(pairs, th):
            prod = prod @ sswap(m, i, j, t)
        assert np.max(np.abs(sswap_class_layer(pairs, th, m) - prod)) <= 1e-12


def test_sum_form_breaks_in_pair_space():
    a = kron(swap_matrix(4, 0, 1).dense(), swap_matrix(4, 0, 1).dense())
    b = kron(swap_matrix(4, 2, 3).dense(), swap_matrix(4, 2, 3).dense())
    summed = a + b - identity(16)
    assert summed.min() < 0
    assert not np.array_equal(a @ b, summed)
    assert np.array_equal(psswap_class_layer([(0, 1), (2, 3)], [HALF_PI, HALF_PI], 4).round(12), a @ b)


def test_class_layer_rejects_non_matching():
    with pytest.raises(ContractError):
        psswap_class_layer([(0, 1), (1, 2)], [0.1, 0.2], 3)
    with pytest.raises(ContractError):
        psswap_class_layer([(0, 1)], [0.1, 0.2], 3)
    with pytest.raises(ContractError):
        sswap_class_layer([(0, 1), (0, 2)], [0.1, 0.2], 3)


# --- composites and total cost --------------------------------------------

def test_composites_trivial_cases():
    top = topology_line(4)
    ctx = ctx_for(top, [[(0, 3)], [(1, 2)]])
    for k in build_composites(ctx, np.zeros(ctx.n_params)):
        assert np.array_equal(k, identity(16))
    one = ctx_for(top, [[(0, 3)]])
    theta = np.zeros(one.n_params)
    slot = one.schedule.flat.index((0, 1))
    theta[slot] = HALF_PI
    s = swap_matrix(4, 0, 1).dense()
    assert np.allclose(build_composites(one, theta)[0], kron(s, s), atol=1e-15)


def test_composites_doubly_stochastic(rng):
    top = topology_line(4)
    ctx = ctx_for(top, random_matching_layers(rng, 4, 3))
    for k in build_composites(ctx, rng.uniform(-np.pi, np.pi, ctx.n_params)):
        assert is_doubly_stochastic(k, 1e-9)


def test_composite_is_ordered_product_of_psswaps(rng):
    # independent route: one psswap per slot, slot 0 applied first
    top = topology_ring(5)
    ctx = ctx_for(top, random_matching_layers(rng, 5, 2), sweeps=2)
    theta = rng.uniform(-np.pi, np.pi, ctx.n_params)
    k = identity(25)
    ks = build_composites(ctx, theta)
    for t in range(ctx.T):
        for s, (i, j) in enumerate(ctx.schedule.flat):
            k = psswap(5, i, j, theta[t * ctx.S + s]) @ k
        assert np.max(np.abs(ks[t] - k)) <= 1e-12


def test_hardware_cost_examples():
    top = topology_line(3)
    ctx = ctx_for(top, [[(0, 2)]])
    assert ctx(np.zeros(ctx.n_params)) == 2.0
    theta = np.zeros(ctx.n_params)
    theta[ctx.schedule.flat.index((0, 1))] = HALF_PI
    assert abs(ctx(theta)) <= 1e-15
    feasible = ctx_for(top, [[(0, 1)], [(1, 2)]])
    assert feasible(np.zeros(feasible.n_params)) == 0.0


def test_fast_cost_matches_dense(rng):
    for _ in range(30):
        top = topology_ring(int(rng.integers(4, 7)))
        ctx = ctx_for(top, random_matching_layers(rng, top.m, int(rng.integers(1, 4))),
                      sweeps=int(rng.integers(1, 3)), beta=float(rng.uniform(0.2, 1.0)))
        theta = rng.uniform(-np.pi, np.pi, ctx.n_params)
        total, terms = hardware_cost(ctx, theta)
        dtotal, dterms = hardware_cost_dense(ctx, theta)
        assert np.allclose(terms, dterms, atol=1e-10)
        assert abs(total - dtotal) <= 1e-10
        assert total >= 0


def test_cost_at_omega_equals_weighted_layer_costs(rng):
    top = topology_line(5)
    for _ in range(20):
        ctx = ctx_for(top, random_matching_layers(rng, 5, 3))
        theta = rng.integers(-3, 4, ctx.n_params) * HALF_PI
        terms = ctx.terms(theta)
        for t, c in enumerate(realized_maps(theta, ctx.schedule, 5)):
            want = ctx.betas[t] * layer_cost(c, ctx.gs[t], ctx.mc)
            assert abs(terms[t] - want) <= 1e-10


def test_cost_periodic_in_pi(rng):
    top = topology_ring(5)
    ctx = ctx_for(top, random_matching_layers(rng, 5, 2))
    theta = rng.uniform(-np.pi, np.pi, ctx.n_params)
    base = ctx(theta)
    for q in range(ctx.n_params):
        shifted = theta.copy()
        shifted[q] += np.pi
        assert abs(ctx(shifted) - base) <= 1e-10


def test_theta_length_checked():
    ctx = ctx_for(topology_line(3), [[(0, 2)]])
    with pytest.raises(ContractError):
        ctx(np.zeros(ctx.n_params + 1))


def test_betas_decreasing():
    b = betas(0.5, 4)
    assert np.array_equal(b, [1.0, 0.5, 0.25, 0.125])
    with pytest.raises(ContractError):
        CostContext(topology_line(3), LayeredCircuit.from_layers(3, [[(0, 2)]]),
                    partition_generators(topology_line(3)), beta=1.5)


# --- gradient -------------------------------------------------------------

def central_fd(ctx, theta, h=1e-5):
    out = np.empty_like(theta)
    for q in range(theta.size):
        up, dn = theta.copy(), theta.copy()
        up[q] += h
        dn[q] -= h
        out[q] = (ctx(up) - ctx(dn)) / (2 * h)
    return out


def test_gradient_matches_shift_rule_and_fd(rng):
    for _ in range(25):
        top = topology_line(int(rng.integers(3, 6)))
        ctx = ctx_for(top, random_matching_layers(rng, top.m, int(rng.integers(1, 4))))
        theta = rng.uniform(-np.pi, np.pi, ctx.n_params)
        g = gradient(ctx, theta)
        assert np.max(np.abs(g - shift_gradient(ctx, theta))) <= 1e-10
        assert np.max(np.abs(g - central_fd(ctx, theta))) <= 1e-6


def test_gradient_vanishes_on_omega(rng):
    top = topology_ring(5)
    ctx = ctx_for(top, random_matching_layers(rng, 5, 3))
    theta = rng.integers(-4, 5, ctx.n_params) * HALF_PI
    assert np.max(np.abs(gradient(ctx, theta))) <= 1e-10


def test_gradient_sign_on_single_swap_instance():
    ctx = ctx_for(topology_line(3), [[(0, 2)]])
    theta = np.zeros(ctx.n_params)
    q = ctx.schedule.flat.index((0, 1))
    theta[q] = np.pi / 4
    assert gradient(ctx, theta)[q] < 0
    assert central_fd(ctx, theta)[q] < 0


def test_gradient_of_empty_circuit_is_zero(rng):
    top = topology_line(4)
    ctx = CostContext(top, LayeredCircuit(4, ((), ())), partition_generators(top))
    theta = rng.uniform(-1, 1, ctx.n_params)
    assert ctx(theta) == 0.0
    assert np.array_equal(gradient(ctx, theta), np.zeros(ctx.n_params))


def test_zero_cost_iff_feasible_exhaustive(rng):
    top = topology_line(4)
    for _ in range(10):
        layer = random_matching_layers(rng, 4, 1)[0]
        g = LayeredCircuit.from_layers(4, [layer]).adjacency(0)
        for p in itertools.permutations(range(4)):
            pm = PermutationMatrix(p)
            on_edges = all(top.has_edge(p[a], p[b]) for a, b in layer)
            assert (layer_cost(pm, g, top.complement) == 0) == on_edges


def test_layer_operator_groups_by_class(rng):
    top = topology_line(5)
    sched = partition_generators(top)
    th = rng.uniform(-np.pi, np.pi, sched.S)
    a = psswap_class_layer(sched.classes[0], th[:2], 5)
    b = psswap_class_layer(sched.classes[1], th[2:], 5)
    assert np.allclose(layer_operator_dense(sched, th, 5), b @ a, atol=1e-13)
