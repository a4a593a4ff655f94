"""Realization of projected angles as concrete swap sub-layers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coloring import GeneratorSchedule
from .errors import ContractError
from .tensor import PermutationMatrix

HALF_PI = np.pi / 2
OMEGA_TOL = 1e-9


@dataclass(frozen=True)
class LayerSwaps:
    """Swaps realized before one circuit layer.

    ``sublayers`` holds only the non-empty (sweep, class) groups, in execution
    order; pairs inside one sub-layer are disjoint.
    """

    sublayers: tuple
    perm: PermutationMatrix

    @property
    def n_swaps(self) -> int:
        return sum(len(s) for s in self.sublayers)

    @property
    def depth(self) -> int:
        return len(self.sublayers)


def swaps_to_perm(m: int, sublayers) -> PermutationMatrix:
    """Layout change produced by running ``sublayers`` in order."""
    mp = list(range(m))
    for sub in sublayers:
        for i, j in sub:
            mp[i], mp[j] = mp[j], mp[i]
    # mp[pos] = position content came from; invert to get where each position went
    return PermutationMatrix(tuple(mp)).inverse()


def thetas_to_swaps(theta, schedule: GeneratorSchedule, m: int) -> list:
    """One ``LayerSwaps`` per layer; ``theta`` must lie on the pi/2 grid."""
    theta = np.asarray(theta, dtype=np.float64).reshape(-1)
    S = schedule.S
    if theta.size % S:
        raise ContractError(f"theta length {theta.size} is not a multiple of S={S}")
    k = np.rint(theta / HALF_PI)
    off = np.abs(theta - k * HALF_PI)
    if off.size and off.max() > OMEGA_TOL:
        q = int(np.argmax(off))
        raise ContractError(f"theta[{q}]={theta[q]!r} is not a multiple of pi/2")
    on = (k.astype(np.int64) % 2) == 1
    out = []
    groups = schedule.slot_group
    for t in range(theta.size // S):
        subs: dict = {}
        for s in range(S):
            if on[t * S + s]:
                subs.setdefault(groups[s], []).append(schedule.flat[s])
        sublayers = tuple(tuple(subs[g]) for g in sorted(subs))
        out.append(LayerSwaps(sublayers, swaps_to_perm(m, sublayers)))
    return out
