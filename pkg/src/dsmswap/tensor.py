"""Dense real linear algebra used by the cost model.

Matrices are plain float64 ``numpy`` arrays. Vectorization is row-major:
``vec(A)[i*n + j] == A[i, j]``, so that ``(A kron B) vec(X) == vec(A X B^T)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, ShapeError, SizeError

MAX_QUBITS = 64
MAX_DIM = MAX_QUBITS * MAX_QUBITS
NEG_CLAMP = 1e-12


def identity(m: int) -> np.ndarray:
    return np.eye(m)


def ones(m: int) -> np.ndarray:
    return np.ones((m, m))


def _square(a, name="matrix"):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {a.shape}")
    return a


def kron(a, b) -> np.ndarray:
    """Kronecker product with a size guard (result side at most 4096)."""
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if rows > MAX_DIM or cols > MAX_DIM:
        raise SizeError(f"kron result {rows}x{cols} exceeds {MAX_DIM}")
    return np.kron(a, b)


def vec(a) -> np.ndarray:
    """Row-major vectorization of a square matrix."""
    return _square(a).reshape(-1).copy()


def unvec(v, n: int) -> np.ndarray:
    return np.asarray(v, dtype=np.float64).reshape(n, n)


def hadamard_contraction(a, b) -> float:
    """``1^T (A o B) 1``, i.e. the sum of the entrywise product."""
    a = _square(a, "a")
    b = _square(b, "b")
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.sum(a * b))


@dataclass(frozen=True)
class PermutationMatrix:
    """Permutation of ``range(size)``; ``mapping[k]`` is the image of basis vector k.

    The dense form has ``D[mapping[k], k] == 1``, so ``D @ e_k == e_{mapping[k]}``.
    """

    mapping: tuple

    def __post_init__(self):
        mp = tuple(int(k) for k in self.mapping)
        if sorted(mp) != list(range(len(mp))):
            raise ContractError(f"not a bijection on 0..{len(mp) - 1}: {mp}")
        object.__setattr__(self, "mapping", mp)

    @classmethod
    def identity(cls, m: int) -> "PermutationMatrix":
        return cls(tuple(range(m)))

    @property
    def size(self) -> int:
        return len(self.mapping)

    def __call__(self, k: int) -> int:
        return self.mapping[k]

    def dense(self) -> np.ndarray:
        m = self.size
        d = np.zeros((m, m))
        d[list(self.mapping), list(range(m))] = 1.0
        return d

    def compose(self, other: "PermutationMatrix") -> "PermutationMatrix":
        """``self o other``: apply ``other`` first (dense: ``self @ other``)."""
        if other.size != self.size:
            raise ShapeError("permutation sizes differ")
        return PermutationMatrix(tuple(self.mapping[k] for k in other.mapping))

    def __matmul__(self, other):
        if isinstance(other, PermutationMatrix):
            return self.compose(other)
        return NotImplemented

    def inverse(self) -> "PermutationMatrix":
        inv = [0] * self.size
        for k, v in enumerate(self.mapping):
            inv[v] = k
        return PermutationMatrix(tuple(inv))

    def apply(self, v) -> np.ndarray:
        """Index-mapping fast path for ``dense() @ v``."""
        v = np.asarray(v)
        out = np.empty_like(v)
        out[list(self.mapping)] = v
        return out

    def conjugate(self, x) -> np.ndarray:
        """``P X P^T`` without a dense multiply."""
        x = np.asarray(x)
        out = np.empty_like(x)
        idx = np.asarray(self.mapping)
        out[np.ix_(idx, idx)] = x
        return out


def _check_pair(m, i, j):
    if m < 2:
        raise ContractError(f"need m >= 2, got {m}")
    if m > MAX_QUBITS:
        raise SizeError(f"m={m} exceeds {MAX_QUBITS}")
    if not (0 <= i < m and 0 <= j < m):
        raise ContractError(f"swap targets ({i}, {j}) out of range for m={m}")
    if i == j:
        raise ContractError(f"swap targets must be distinct, got ({i}, {j})")


def swap_matrix(m: int, i: int, j: int) -> PermutationMatrix:
    _check_pair(m, i, j)
    mp = list(range(m))
    mp[i], mp[j] = j, i
    return PermutationMatrix(tuple(mp))


def sswap(m: int, i: int, j: int, theta: float) -> np.ndarray:
    """Smooth swap: ``cos^2(theta) I + sin^2(theta) SWAP(i, j)``."""
    s = swap_matrix(m, i, j).dense()
    w = np.sin(theta) ** 2
    return (1.0 - w) * np.eye(m) + w * s


def psswap(m: int, i: int, j: int, theta: float) -> np.ndarray:
    """``cos^2(theta) I_{m^2} + sin^2(theta) SWAP(i, j) kron SWAP(i, j)``.

    Not the same as ``kron(sswap, sswap)`` for generic theta.
    """
    s = swap_matrix(m, i, j).dense()
    w = np.sin(theta) ** 2
    return (1.0 - w) * np.eye(m * m) + w * kron(s, s)


def is_doubly_stochastic(a, tol: float = 1e-9) -> bool:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.size == 0:
        return False
    if a.min() < -tol:
        return False
    return bool(np.all(np.abs(a.sum(axis=0) - 1.0) <= tol)
                and np.all(np.abs(a.sum(axis=1) - 1.0) <= tol))


def clamp_dsm(a) -> np.ndarray:
    """Zero out roundoff negatives down to ``-1e-12``; anything lower is an error."""
    a = np.array(a, dtype=np.float64)
    if a.min(initial=0.0) < -NEG_CLAMP:
        raise ContractError(f"entry {a.min()} below -{NEG_CLAMP}")
    a[a < 0] = 0.0
    return a
