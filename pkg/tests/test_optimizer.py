"""Unit tests for grid search, multistart, bootstrapping, and best-of selection."""

import numpy as np
import pytest

from hyperqaoa import cost as costmod
from hyperqaoa import hypergraph as hg
from hyperqaoa import optimizer as opt
from hyperqaoa import simulator as sim
from hyperqaoa.cost import EmptyHypergraphError
from hyperqaoa.hypergraph import Hyperedge, Hypergraph
from hyperqaoa.optimizer import BootstrapStrategy, Method, OptimizerBudget
from hyperqaoa.simulator import AngleSchedule


def edge(*nodes, w=1.0):
    return Hyperedge(tuple(nodes), w)


def reevaluate(h, result):
    return sim.expectation_energy(sim.evolve(h, result.schedule), h)


@pytest.fixture(scope="module")
def pair():
    return Hypergraph(2, (edge(0, 1),))


@pytest.fixture(scope="module")
def mixed_instance():
    return hg.generate_random(hg.GenerationSpec(7, {2: 0.3, 3: 0.08}, seed=12))


# grid search


def test_grid_finds_pair_optimum(pair):
    result = opt.grid_search_p1(pair, 64)
    assert result.energy <= -0.99
    assert result.method is Method.GRID
    assert result.evaluations == 64 * 64
    # the minimizer sits at a symmetry image of (pi/4, pi/8)
    gamma, beta = result.schedule.gammas[0], result.schedule.betas[0]
    assert -np.sin(4 * beta) * np.sin(2 * gamma) == pytest.approx(result.energy, abs=1e-12)


def test_grid_finds_vertex_optimum():
    h = Hypergraph(1, (edge(0),))
    result = opt.grid_search_p1(h, 64)
    assert result.energy <= -0.99
    gamma, beta = result.schedule.gammas[0], result.schedule.betas[0]
    assert -np.sin(2 * beta) * np.sin(2 * gamma) == pytest.approx(result.energy, abs=1e-12)


def test_grid_requires_edges():
    with pytest.raises(EmptyHypergraphError):
        opt.grid_search_p1(Hypergraph(3, ()), 16)


def test_grid_requires_enough_points(pair):
    with pytest.raises(ValueError):
        opt.grid_search_p1(pair, 4)


def test_grid_deterministic(pair):
    a = opt.grid_search_p1(pair, 32)
    b = opt.grid_search_p1(pair, 32)
    assert a == b


# multistart


def test_multistart_hits_pair_optimum(pair):
    result = opt.multistart_local(pair, 1, 10, seed=1)
    assert result.energy == pytest.approx(-1.0, abs=1e-6)
    assert result.method is Method.MULTISTART


def test_multistart_monotone_in_starts(pair):
    one = opt.multistart_local(pair, 1, 1, seed=7)
    fifty = opt.multistart_local(pair, 1, 50, seed=7)
    assert fifty.energy <= one.energy


def test_multistart_deterministic(mixed_instance):
    a = opt.multistart_local(mixed_instance, 2, 5, seed=3)
    b = opt.multistart_local(mixed_instance, 2, 5, seed=3)
    assert a == b


def test_multistart_reevaluation_consistency(mixed_instance):
    result = opt.multistart_local(mixed_instance, 2, 5, seed=9)
    assert reevaluate(mixed_instance, result) == pytest.approx(result.energy, abs=1e-9)


def test_multistart_within_spectrum_bounds(mixed_instance):
    summary = costmod.extreme_energies(mixed_instance)
    for p in (1, 2, 3):
        result = opt.multistart_local(mixed_instance, p, 3, seed=p)
        assert summary.e_min - 1e-9 <= result.energy <= summary.e_max + 1e-9


# bootstrap


def test_bootstrap_start_schedules():
    prev = AngleSchedule((0.3, 0.5), (0.4, 0.2))
    appended = opt.bootstrap_start_schedule(prev, BootstrapStrategy.APPEND_ZERO)
    assert appended.gammas == (0.3, 0.5, 0.0)
    assert appended.betas == (0.4, 0.2, 0.0)
    single = opt.bootstrap_start_schedule(
        AngleSchedule((0.3,), (0.4,)), BootstrapStrategy.INTERPOLATE
    )
    assert single.gammas == (0.3, 0.3)
    assert single.betas == (0.4, 0.4)
    interp = opt.bootstrap_start_schedule(prev, BootstrapStrategy.INTERPOLATE)
    assert interp.gammas == pytest.approx((0.3, 0.4, 0.5))
    assert interp.betas == pytest.approx((0.4, 0.3, 0.2))


def test_append_zero_start_energy_is_exact(mixed_instance):
    prev = opt.multistart_local(mixed_instance, 1, 3, seed=2)
    start = opt.bootstrap_start_schedule(prev.schedule, BootstrapStrategy.APPEND_ZERO)
    extended = sim.expectation_energy(sim.evolve(mixed_instance, start), mixed_instance)
    original = sim.expectation_energy(
        sim.evolve(mixed_instance, prev.schedule), mixed_instance
    )
    assert extended == original  # identity layer, bit exact


def test_bootstrap_never_worse_than_append_zero_start(mixed_instance):
    prev = opt.multistart_local(mixed_instance, 1, 3, seed=2)
    result = opt.bootstrap_extend(mixed_instance, prev, BootstrapStrategy.APPEND_ZERO)
    assert result.energy <= prev.energy + 1e-9
    assert result.method is Method.BOOTSTRAP
    assert result.schedule.p == 2


def test_bootstrap_keeps_global_optimum(pair):
    prev = opt.multistart_local(pair, 1, 10, seed=1)
    result = opt.bootstrap_extend(pair, prev, BootstrapStrategy.APPEND_ZERO)
    assert result.energy == pytest.approx(-1.0, abs=1e-6)


# best_schedule


def test_best_schedule_beats_grid(pair):
    budget = OptimizerBudget(grid_points=16, starts_p1=3, seed=0)
    best = opt.best_schedule(pair, 1, budget)
    grid = opt.grid_search_p1(pair, budget.grid_points)
    assert best.energy <= grid.energy


def test_best_schedule_monotone_in_depth(mixed_instance):
    budget = OptimizerBudget(grid_points=16, starts_p1=3, starts_high=3, seed=4)
    chain = opt.best_schedule_chain(mixed_instance, 3, budget)
    assert [r.schedule.p for r in chain] == [1, 2, 3]
    for prev, nxt in zip(chain, chain[1:]):
        assert nxt.energy <= prev.energy + 1e-9


def test_best_schedule_within_bounds_and_consistent(mixed_instance):
    budget = OptimizerBudget(grid_points=16, starts_p1=3, starts_high=3, seed=4)
    summary = costmod.extreme_energies(mixed_instance)
    result = opt.best_schedule(mixed_instance, 2, budget)
    assert summary.e_min - 1e-9 <= result.energy <= summary.e_max + 1e-9
    assert reevaluate(mixed_instance, result) == pytest.approx(result.energy, abs=1e-9)


def test_best_schedule_deterministic(mixed_instance):
    budget = OptimizerBudget(grid_points=16, starts_p1=2, starts_high=2, seed=6)
    assert opt.best_schedule(mixed_instance, 2, budget) == opt.best_schedule(
        mixed_instance, 2, budget
    )


def test_best_schedule_matches_chain_tail(mixed_instance):
    budget = OptimizerBudget(grid_points=16, starts_p1=2, starts_high=2, seed=8)
    chain = opt.best_schedule_chain(mixed_instance, 2, budget)
    assert opt.best_schedule(mixed_instance, 2, budget) == chain[-1]
