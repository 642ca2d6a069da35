"""Variational angle optimization.

Three routes, mirrored by the ``Method`` enum: an exhaustive depth-1 grid
over the periodic box gamma in [-pi, pi) x beta in [-pi/2, pi/2),
multistart local minimization from uniform starts in that box, and
bootstrapping a depth-(p+1) schedule from a depth-p result.  The local
minimizer is L-BFGS-B with central-difference gradients (step 1e-6),
stopping on |energy change| < 1e-10 or a 2,000-evaluation budget per run.
Everything is deterministic given the seed.

Energy evaluations dominate the cost, so the inner loop runs through a
numba-compiled kernel when numba is importable and falls back to the
plain numpy simulator otherwise; both compute the same evolution.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .cost import EmptyHypergraphError, diagonal_table
from .hypergraph import Hypergraph
from .simulator import AngleSchedule, _mixer_inplace, initial_state

try:
    from numba import njit as _njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _HAVE_NUMBA = False

GAMMA_BOX = (-np.pi, np.pi)
BETA_BOX = (-np.pi / 2, np.pi / 2)

FD_STEP = 1e-6
ENERGY_TOL = 1e-10


class Method(enum.Enum):
    GRID = "grid"
    MULTISTART = "multistart"
    BOOTSTRAP = "bootstrap"


class BootstrapStrategy(enum.Enum):
    APPEND_ZERO = "append_zero"
    INTERPOLATE = "interpolate"


@dataclass(frozen=True)
class OptimizationResult:
    schedule: AngleSchedule
    energy: float
    method: Method
    evaluations: int
    seed: int


@dataclass(frozen=True)
class OptimizerBudget:
    """Search effort knobs; defaults are sized for quick desk-scale runs.

    ``bootstrap_strategies`` lists the bootstrap starts tried at each
    depth; the append-zero start guarantees depth monotonicity while the
    interpolation start often finds the smooth-ramp optima that random
    multistarts miss.
    """

    grid_points: int = 64
    starts_p1: int = 30
    starts_high: int = 100
    max_evals: int = 2000
    bootstrap_strategies: tuple[BootstrapStrategy, ...] = (
        BootstrapStrategy.APPEND_ZERO,
        BootstrapStrategy.INTERPOLATE,
    )
    seed: int = 0


def _evolve_energy_numpy(table: np.ndarray, n: int, gammas, betas) -> float:
    state = initial_state(n)
    for gamma, beta in zip(gammas, betas):
        state *= np.exp(-1j * gamma * table)
        _mixer_inplace(state, beta, n)
    probs = state.real**2 + state.imag**2
    return float(probs @ table)


if _HAVE_NUMBA:

    @_njit(cache=True)
    def _evolve_energy_kernel(table, n, gammas, betas):  # pragma: no cover - jitted
        dim = table.shape[0]
        state = np.full(dim, 1.0 / np.sqrt(dim) + 0.0j)
        for layer in range(gammas.shape[0]):
            g = gammas[layer]
            for i in range(dim):
                t = g * table[i]
                state[i] = state[i] * complex(np.cos(t), -np.sin(t))
            c = np.cos(betas[layer])
            s = np.sin(betas[layer])
            for q in range(n):
                step = 1 << q
                for base in range(0, dim, step << 1):
                    for off in range(step):
                        i0 = base + off
                        i1 = i0 + step
                        a = state[i0]
                        b = state[i1]
                        state[i0] = c * a + 1j * s * b
                        state[i1] = c * b + 1j * s * a
        energy = 0.0
        for i in range(dim):
            energy += (state[i].real ** 2 + state[i].imag ** 2) * table[i]
        return energy


class _Evaluator:
    """Energy of packed angles [g_1..g_p, b_1..b_p] for one instance, counted."""

    def __init__(self, h: Hypergraph):
        self.n = h.n
        self.table = diagonal_table(h)
        self.count = 0

    def __call__(self, params: np.ndarray) -> float:
        self.count += 1
        params = np.asarray(params, dtype=float)
        p = len(params) // 2
        if _HAVE_NUMBA:
            return float(
                _evolve_energy_kernel(self.table, self.n, params[:p], params[p:])
            )
        return _evolve_energy_numpy(self.table, self.n, params[:p], params[p:])


def _unpack(params: np.ndarray) -> AngleSchedule:
    p = len(params) // 2
    return AngleSchedule(tuple(params[:p]), tuple(params[p:]))


def _local_minimize(
    evaluator: _Evaluator, x0: np.ndarray, max_evals: int
) -> tuple[np.ndarray, float]:
    """One monotone local run; returns the better of start and end point."""

    def gradient(x: np.ndarray) -> np.ndarray:
        g = np.empty_like(x)
        for i in range(len(x)):
            xp = x.copy()
            xm = x.copy()
            xp[i] += FD_STEP
            xm[i] -= FD_STEP
            g[i] = (evaluator(xp) - evaluator(xm)) / (2.0 * FD_STEP)
        return g

    f0 = evaluator(x0)
    # each accepted step costs one energy call plus one 2*dim-call gradient
    per_iter = 1 + 2 * len(x0)
    maxfun = max(2, max_evals // per_iter)
    res = minimize(
        evaluator,
        x0,
        jac=gradient,
        method="L-BFGS-B",
        options={"ftol": ENERGY_TOL, "maxfun": maxfun},
    )
    if res.fun < f0:
        return np.asarray(res.x, dtype=float), float(res.fun)
    return np.asarray(x0, dtype=float), f0


def _subseed(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence([seed, *key]).generate_state(1, dtype=np.uint64)[0])


def grid_search_p1(h: Hypergraph, grid_points: int = 64) -> OptimizationResult:
    """Exhaustive depth-1 search on a uniform grid over the periodic box.

    Ties go to the lowest (gamma index, beta index) pair.
    """
    if grid_points < 8:
        raise ValueError("grid needs at least 8 points per axis")
    if not h.edges:
        raise EmptyHypergraphError("cannot optimize a hypergraph without edges")
    evaluator = _Evaluator(h)
    gammas = np.linspace(GAMMA_BOX[0], GAMMA_BOX[1], grid_points, endpoint=False)
    betas = np.linspace(BETA_BOX[0], BETA_BOX[1], grid_points, endpoint=False)
    best = (np.inf, 0.0, 0.0)
    for gamma in gammas:
        for beta in betas:
            energy = evaluator(np.array([gamma, beta]))
            if energy < best[0]:
                best = (energy, gamma, beta)
    schedule = AngleSchedule((best[1],), (best[2],))
    return OptimizationResult(schedule, best[0], Method.GRID, evaluator.count, 0)


def multistart_local(
    h: Hypergraph, p: int, n_starts: int, seed: int, max_evals: int = 2000
) -> OptimizationResult:
    """Best of ``n_starts`` local runs from uniform random starts in the box."""
    if p < 1:
        raise ValueError("depth must be at least 1")
    if n_starts < 1:
        raise ValueError("need at least one start")
    if not h.edges:
        raise EmptyHypergraphError("cannot optimize a hypergraph without edges")
    rng = np.random.default_rng(seed)
    evaluator = _Evaluator(h)
    best_x: np.ndarray | None = None
    best_f = np.inf
    for _ in range(n_starts):
        x0 = np.concatenate(
            [rng.uniform(*GAMMA_BOX, size=p), rng.uniform(*BETA_BOX, size=p)]
        )
        x, f = _local_minimize(evaluator, x0, max_evals)
        if f < best_f:
            best_x, best_f = x, f
    return OptimizationResult(
        _unpack(best_x), best_f, Method.MULTISTART, evaluator.count, seed
    )


def bootstrap_start_schedule(
    schedule: AngleSchedule, strategy: BootstrapStrategy
) -> AngleSchedule:
    """Depth-(p+1) starting schedule grown from a depth-p schedule.

    APPEND_ZERO adds an identity layer, preserving the energy exactly;
    INTERPOLATE resamples the layer-index-normalized angle curves onto
    p+1 points.
    """
    p = schedule.p
    gammas = np.asarray(schedule.gammas)
    betas = np.asarray(schedule.betas)
    if strategy is BootstrapStrategy.APPEND_ZERO:
        g0 = np.append(gammas, 0.0)
        b0 = np.append(betas, 0.0)
    else:
        old_grid = np.linspace(0.0, 1.0, p)
        new_grid = np.linspace(0.0, 1.0, p + 1)
        g0 = np.interp(new_grid, old_grid, gammas)
        b0 = np.interp(new_grid, old_grid, betas)
    return AngleSchedule(tuple(g0), tuple(b0))


def bootstrap_extend(
    h: Hypergraph,
    prev: OptimizationResult,
    strategy: BootstrapStrategy = BootstrapStrategy.APPEND_ZERO,
    max_evals: int = 2000,
) -> OptimizationResult:
    """Grow a depth-p result to depth p+1 and re-optimize locally.

    With APPEND_ZERO the starting energy equals the previous energy, so
    the returned energy can only improve on it.
    """
    start = bootstrap_start_schedule(prev.schedule, strategy)
    evaluator = _Evaluator(h)
    x0 = np.concatenate([start.gammas, start.betas])
    x, f = _local_minimize(evaluator, x0, max_evals)
    return OptimizationResult(_unpack(x), f, Method.BOOTSTRAP, evaluator.count, prev.seed)


def best_schedule_chain(
    h: Hypergraph, max_p: int, budget: OptimizerBudget = OptimizerBudget()
) -> list[OptimizationResult]:
    """Best result per depth 1..max_p, sharing the bootstrap chain.

    Depth 1 takes the better of the grid and a multistart batch; each
    further depth takes the better of a multistart batch and a bootstrap
    of the previous depth's winner.  Exact ties prefer the earlier method
    in the order grid, multistart, bootstrap.
    """
    if max_p < 1:
        raise ValueError("depth must be at least 1")
    candidates = [
        grid_search_p1(h, budget.grid_points),
        multistart_local(h, 1, budget.starts_p1, _subseed(budget.seed, 1), budget.max_evals),
    ]
    chain = [min(candidates, key=lambda r: r.energy)]
    for depth in range(2, max_p + 1):
        candidates = [
            multistart_local(
                h, depth, budget.starts_high, _subseed(budget.seed, depth), budget.max_evals
            )
        ]
        for strategy in budget.bootstrap_strategies:
            candidates.append(bootstrap_extend(h, chain[-1], strategy, budget.max_evals))
        chain.append(min(candidates, key=lambda r: r.energy))
    return chain


def best_schedule(
    h: Hypergraph, p: int, budget: OptimizerBudget = OptimizerBudget()
) -> OptimizationResult:
    """Best result at depth ``p`` (see :func:`best_schedule_chain`)."""
    return best_schedule_chain(h, p, budget)[-1]
