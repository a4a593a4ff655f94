import os
import subprocess
import sys

import numpy as np
import pytest

from dsmswap import kernels
from dsmswap.circuit import LayeredCircuit, topology_heavy_hex, topology_ring
from dsmswap.coloring import partition_generators
from dsmswap.cost import CostContext


def random_ctx(r, top, T, sweeps=1):
    layers = []
    for _ in range(T):
        p = r.permutation(top.m)
        layers.append([(int(p[2 * i]), int(p[2 * i + 1])) for i in range(top.m // 2)])
    return CostContext(top, LayeredCircuit.from_layers(top.m, layers), partition_generators(top, sweeps))


def args_of(ctx, theta):
    return kernels._prep(ctx.mc, ctx.gs, ctx.betas, ctx.schedule.pairs_array, theta)


@pytest.mark.parametrize("top", [topology_ring(6), topology_heavy_hex(1)])
def test_paths_agree(top):
    r = np.random.default_rng(5)
    ctx = random_ctx(r, top, 3, sweeps=2)
    theta = r.uniform(-np.pi, np.pi, ctx.n_params)
    a = args_of(ctx, theta)
    ref_terms, ref_grad = kernels.numpy_chain(*a)
    py_terms, py_grad = kernels.python_chain(*a, True)
    assert np.allclose(py_terms, ref_terms, atol=1e-12)
    assert np.allclose(py_grad, ref_grad, atol=1e-12)
    if kernels.numba_chain is not None:
        nb_terms, nb_grad = kernels.numba_chain(*a, True)
        assert np.allclose(nb_terms, ref_terms, atol=1e-12)
        assert np.allclose(nb_grad, ref_grad, atol=1e-12)


def test_cost_only_skips_gradient():
    r = np.random.default_rng(1)
    ctx = random_ctx(r, topology_ring(5), 2)
    theta = r.uniform(-1, 1, ctx.n_params)
    terms, grad = kernels.numpy_chain(*args_of(ctx, theta), want_grad=False)
    assert np.allclose(terms, ctx.terms(theta), atol=1e-12)
    assert not np.any(grad)


def test_zero_weight_layers_are_skipped():
    r = np.random.default_rng(2)
    ctx = random_ctx(r, topology_ring(5), 2)
    theta = r.uniform(-1, 1, ctx.n_params)
    mc, gs, betas, pairs, th = args_of(ctx, theta)
    betas = betas.copy()
    betas[1] = 0.0
    terms, grad = kernels.numpy_chain(mc, gs, betas, pairs, th)
    assert terms[1] == 0.0
    terms0, grad0 = kernels.numpy_chain(mc, gs[:1], betas[:1], pairs, th)
    assert np.allclose(grad[:ctx.S], grad0[:ctx.S], atol=1e-12)
    assert not np.any(grad[ctx.S:])


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, DSMSWAP_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "import dsmswap.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
