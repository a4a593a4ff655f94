"""Per-window solver: differential multiplier descent, projection, selection."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .circuit import LayeredCircuit, Topology
from .coloring import GeneratorSchedule
from .cost import DEFAULT_BETA, CostContext
from .errors import ContractError, NumericError
from .swaps import HALF_PI, thetas_to_swaps
from .tensor import PermutationMatrix

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class KnitterConfig:
    max_trials: int = 8
    max_optim_steps: int = 30
    eta_theta: float = 0.02
    eta_lambda: float = 0.1
    epsilon: float = HALF_PI
    grad_stop: float = 1e-6
    alpha: float = 1.0
    seed: int = 0
    # score the projection of every iterate, not only the last one
    keep_best_iterate: bool = False

    def __post_init__(self):
        if self.max_trials < 1 or self.max_optim_steps < 1:
            raise ContractError("max_trials and max_optim_steps must be >= 1")
        for name in ("eta_theta", "eta_lambda", "epsilon", "grad_stop", "alpha"):
            if not getattr(self, name) > 0:
                raise ContractError(f"{name} must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrialReport:
    trial: int
    steps: int
    feasible_layers: int
    cost: float
    merit: float
    lambda_trace: list = field(repr=False, default_factory=list)
    failed: bool = False


@dataclass
class KnitterResult:
    theta_star: np.ndarray | None
    feasible_layers: int
    trials: list
    best_trial: int | None = None


def project_to_omega(theta) -> np.ndarray:
    """Nearest multiple of pi/2; exact ties go to the smaller magnitude."""
    theta = np.asarray(theta, dtype=np.float64)
    x = theta / HALF_PI
    k = np.sign(x) * np.ceil(np.abs(x) - 0.5)
    return k * HALF_PI + 0.0  # + 0.0 turns -0.0 into 0.0


def merit(ctx: CostContext, theta, alpha: float) -> float:
    return float(theta @ theta) + alpha * ctx(theta)


def bdmm_run(ctx: CostContext, config: KnitterConfig, rng: np.random.Generator, on_step=None):
    """One trial from a fresh uniform start.

    Returns ``(theta, lambda, steps, lambda_trace)``. The multiplier only ever
    grows because the cost is non-negative. ``on_step(theta)`` is called after
    every update when given.
    """
    theta = rng.uniform(0.0, config.epsilon, ctx.n_params)
    lam = rng.uniform(0.0, config.epsilon)
    trace = [lam]
    _, _, grad = ctx.evaluate(theta)
    steps = 0
    for steps in range(1, config.max_optim_steps + 1):
        theta = theta - config.eta_theta * (2.0 * theta + lam * grad)
        cost, _, grad = ctx.evaluate(theta)
        if not (np.isfinite(cost) and np.all(np.isfinite(grad)) and np.all(np.isfinite(theta))):
            raise NumericError(f"non-finite iterate at step {steps}")
        lam = lam + config.eta_lambda * cost
        trace.append(lam)
        if on_step is not None:
            on_step(theta)
        if float(grad @ grad) <= config.grad_stop:
            break
    return theta, lam, steps, trace


def realized_maps(theta_proj, schedule: GeneratorSchedule, m: int) -> list:
    """Cumulative layouts ``C_t = P_t o C_{t-1}`` starting from the identity."""
    c = PermutationMatrix.identity(m)
    out = []
    for layer in thetas_to_swaps(theta_proj, schedule, m):
        c = layer.perm @ c
        out.append(c)
    return out


def count_feasible_prefix(ctx: CostContext, theta_proj) -> int:
    """Number of leading window layers whose gates all sit on coupling edges."""
    maps = realized_maps(ctx._check(theta_proj), ctx.schedule, ctx.m)
    for t, (c, layer) in enumerate(zip(maps, ctx.circuit.layers)):
        if any(not ctx.topology.has_edge(c(g.q0), c(g.q1)) for g in layer):
            return t
    return ctx.T


def trial_rng(seed: int, key, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, key), int(trial)]))


def knitter(layers: LayeredCircuit, topology: Topology, schedule: GeneratorSchedule,
            config: KnitterConfig = KnitterConfig(), beta: float = DEFAULT_BETA,
            key=()) -> KnitterResult:
    """Multi-trial solve of one window; keeps the feasible prefix of the best trial.

    Best means most feasible leading layers, then lowest ``|theta|^2 + alpha L``.
    ``key`` salts the per-trial random streams (the router passes its window
    position) so that repeated calls stay reproducible but independent.
    With ``keep_best_iterate`` each trial offers the best projection seen along
    its path instead of the projection of its last iterate.
    """
    if layers.depth < 1:
        raise ContractError("empty window")
    ctx = CostContext(topology, layers, schedule, beta)
    reports = []
    best = None  # (l, -merit); strict > keeps the earliest trial on ties
    best_theta = None
    best_idx = None

    def score(proj):
        l = count_feasible_prefix(ctx, proj)
        cost = ctx(proj)
        return l, cost, float(proj @ proj) + config.alpha * cost

    for trial in range(config.max_trials):
        rng = trial_rng(config.seed, key, trial)
        seen = []  # best (rank, proj) along the trajectory

        def watch(theta):
            proj = project_to_omega(theta)
            l, _, g = score(proj)
            if not seen or (l, -g) > seen[0]:
                seen[:] = [(l, -g), proj]

        try:
            theta, lam, steps, trace = bdmm_run(
                ctx, config, rng, watch if config.keep_best_iterate else None)
        except NumericError as exc:
            log.debug("trial %d aborted: %s", trial, exc)
            reports.append(TrialReport(trial, 0, 0, float("nan"), float("nan"), [], True))
            continue
        # the final iterate is among those watched, so seen already covers it
        proj = seen[1] if seen else project_to_omega(theta)
        l, cost, g = score(proj)
        reports.append(TrialReport(trial, steps, l, cost, g, trace))
        rank = (l, -g)
        if best is None or rank > best:
            best, best_theta, best_idx = rank, proj, trial
    if best is None or best[0] == 0:
        return KnitterResult(None, 0, reports, None)
    l = best[0]
    return KnitterResult(best_theta[:l * schedule.S].copy(), l, reports, best_idx)
