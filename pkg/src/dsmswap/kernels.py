"""Hot loops of the cost/gradient evaluation.

States are m x m matrices ``X`` standing in for ``vec(X)`` in the m^2 space; an
elementary PSSWAP on pair (i, j) with weight ``w = sin^2(theta)`` acts as

    X <- X + w * (S X S - X),   S = SWAP_m(i, j)

which only touches rows and columns i and j. Every chain of such factors is
therefore applied without ever forming an m^2 x m^2 matrix.

Two interchangeable implementations exist: compiled loops (numba) and a
numpy path. ``cost_terms``/``cost_and_grad`` use the numba versions unless
numba is missing or ``DSMSWAP_DISABLE_NUMBA`` is set.
"""
import math
import types

import numpy as np

from . import _accel

QUARTER_PI = math.pi / 4


# --- loop kernels (numba-compatible) -------------------------------------

def _apply_pair_loop(x, i, j, w):
    m = x.shape[0]
    for k in range(m):
        if k == i or k == j:
            continue
        a = x[i, k]
        b = x[j, k]
        x[i, k] = a + w * (b - a)
        x[j, k] = b + w * (a - b)
        a = x[k, i]
        b = x[k, j]
        x[k, i] = a + w * (b - a)
        x[k, j] = b + w * (a - b)
    ii = x[i, i]
    jj = x[j, j]
    ij = x[i, j]
    ji = x[j, i]
    x[i, i] = ii + w * (jj - ii)
    x[j, j] = jj + w * (ii - jj)
    x[i, j] = ij + w * (ji - ij)
    x[j, i] = ji + w * (ij - ji)


def _pair_delta_loop(a, x, i, j):
    # <A, S X S - X>
    m = x.shape[0]
    acc = 0.0
    for k in range(m):
        if k == i or k == j:
            continue
        acc += (x[j, k] - x[i, k]) * (a[i, k] - a[j, k])
        acc += (x[k, j] - x[k, i]) * (a[k, i] - a[k, j])
    acc += (x[j, j] - x[i, i]) * (a[i, i] - a[j, j])
    acc += (x[j, i] - x[i, j]) * (a[i, j] - a[j, i])
    return acc


def _chain_loop(mc, gs, betas, pairs, theta, want_grad):
    n_layers = gs.shape[0]
    n_slots = pairs.shape[0]
    m = mc.shape[0]
    w = np.sin(theta) ** 2
    shift = np.sin(theta + QUARTER_PI) ** 2 - np.sin(theta - QUARTER_PI) ** 2
    terms = np.zeros(n_layers)
    grad = np.zeros(n_layers * n_slots)
    states = np.empty((n_layers * n_slots + 1, m, m))
    adj = np.empty((m, m))
    for t in range(n_layers):
        if betas[t] == 0.0:
            continue
        g = gs[t]
        empty = True
        for a in range(m):
            for b in range(m):
                if g[a, b] != 0.0:
                    empty = False
        if empty:
            continue
        n = (t + 1) * n_slots
        states[0] = g
        for q in range(n):
            states[q + 1] = states[q]
            s = q % n_slots
            _apply_pair(states[q + 1], pairs[s, 0], pairs[s, 1], w[q])
        val = 0.0
        for a in range(m):
            for b in range(m):
                val += mc[a, b] * states[n, a, b]
        terms[t] = betas[t] * val
        if want_grad:
            adj[:, :] = mc
            for q in range(n - 1, -1, -1):
                s = q % n_slots
                i = pairs[s, 0]
                j = pairs[s, 1]
                grad[q] += betas[t] * shift[q] * _pair_delta(adj, states[q], i, j)
                _apply_pair(adj, i, j, w[q])
    return terms, grad


# --- numpy kernels --------------------------------------------------------

def _swapped(x, i, j):
    y = x.copy()
    y[[i, j], :] = y[[j, i], :]
    y[:, [i, j]] = y[:, [j, i]]
    return y


def _apply_pair_np(x, i, j, w):
    x += w * (_swapped(x, i, j) - x)


def _pair_delta_np(a, x, i, j):
    return float(np.sum(a * (_swapped(x, i, j) - x)))


def _chain_np(mc, gs, betas, pairs, theta, want_grad):
    n_layers = gs.shape[0]
    n_slots = pairs.shape[0]
    w = np.sin(theta) ** 2
    shift = np.sin(theta + QUARTER_PI) ** 2 - np.sin(theta - QUARTER_PI) ** 2
    terms = np.zeros(n_layers)
    grad = np.zeros(n_layers * n_slots)
    for t in range(n_layers):
        if betas[t] == 0.0 or not gs[t].any():
            continue
        n = (t + 1) * n_slots
        states = [gs[t].copy()]
        for q in range(n):
            x = states[-1].copy()
            i, j = pairs[q % n_slots]
            _apply_pair_np(x, i, j, w[q])
            states.append(x)
        terms[t] = betas[t] * float(np.sum(mc * states[n]))
        if want_grad:
            adj = mc.copy()
            for q in range(n - 1, -1, -1):
                i, j = pairs[q % n_slots]
                grad[q] += betas[t] * shift[q] * _pair_delta_np(adj, states[q], i, j)
                _apply_pair_np(adj, i, j, w[q])
    return terms, grad


def numpy_chain(mc, gs, betas, pairs, theta, want_grad=True):
    return _chain_np(mc, gs, betas, pairs, theta, want_grad)


def _rebind(func, **names):
    # same code object, different callees: lets numba cache the compiled chain
    glb = dict(func.__globals__, **names)
    return types.FunctionType(func.__code__, glb, func.__name__)


_apply_pair = _apply_pair_loop
_pair_delta = _pair_delta_loop
# uncompiled loop path; only useful for cross-checking
python_chain = _chain_loop

if _accel.HAVE_NUMBA:
    numba_chain = _accel.njit(_rebind(_chain_loop,
                                      _apply_pair=_accel.njit(_apply_pair_loop),
                                      _pair_delta=_accel.njit(_pair_delta_loop)))
    BACKEND = "numba"
    chain = numba_chain
else:
    numba_chain = None
    BACKEND = "numpy"
    chain = numpy_chain


def _prep(mc, gs, betas, pairs, theta):
    return (np.ascontiguousarray(mc, dtype=np.float64),
            np.ascontiguousarray(gs, dtype=np.float64),
            np.ascontiguousarray(betas, dtype=np.float64),
            np.ascontiguousarray(pairs, dtype=np.int64),
            np.ascontiguousarray(theta, dtype=np.float64))


def cost_terms(mc, gs, betas, pairs, theta):
    """Per-layer weighted cost terms for a whole window."""
    terms, _ = chain(*_prep(mc, gs, betas, pairs, theta), False)
    return terms


def cost_and_grad(mc, gs, betas, pairs, theta):
    """Per-layer terms and the parameter-shift gradient in one pass."""
    return chain(*_prep(mc, gs, betas, pairs, theta), True)
