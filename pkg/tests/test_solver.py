import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slhjb.controls import ControlSet, decompose, eikonal, triple_integrator
from slhjb.grid import Grid, ScalarField
from slhjb.local import RunningCost, assemble
from slhjb.minimizers import MinimizerConfig, minimize_node
from slhjb.problems import REGISTRY, build
from slhjb.solver import Operator, ProblemSpec, TargetSet, bellman, initial_field, residual, value_iteration


def small_spec(method="ssn_smooth", k=0.25, tol=1e-10, **kw):
    grid = Grid.box(-1, 1, 2, k)
    return ProblemSpec(grid, eikonal(2), ControlSet.ball(2), RunningCost(), np.sqrt(2) / 4 * k,
                       minimizer=MinimizerConfig(method=method, tol=tol), **kw)


def box_spec(k=0.5):
    grid = Grid.box(-1, 1, 3, k)
    return ProblemSpec(grid, triple_integrator(), ControlSet.symmetric_box([0.3, 0.3]), RunningCost(), 0.2 * k,
                       minimizer=MinimizerConfig(method="chambolle_pock", tol=1e-10))


def test_rejects_large_time_step():
    # the admissible step for k = 0.1 is sqrt(2)/2 * 0.1
    with pytest.raises(ValueError, match="exceeds"):
        ProblemSpec(Grid.box(-1, 1, 2, 0.1), eikonal(2), ControlSet.ball(2), RunningCost(), 0.071)
    ProblemSpec(Grid.box(-1, 1, 2, 0.1), eikonal(2), ControlSet.ball(2), RunningCost(), 0.0707)


def test_spec_validation():
    grid = Grid.box(-1, 1, 2, 0.25)
    with pytest.raises(ValueError):
        ProblemSpec(grid, eikonal(2), ControlSet.ball(2), RunningCost("minimum_time"), 0.05, mode="minimum_time")
    with pytest.raises(ValueError):
        ProblemSpec(grid, eikonal(2), ControlSet.ball(2), RunningCost("minimum_time"), 0.05)
    with pytest.raises(ValueError):
        ProblemSpec(grid, eikonal(3), ControlSet.ball(3), RunningCost(), 0.05)
    spec = small_spec()
    assert np.isclose(spec.stop_tol, 0.25**2 / 5)
    assert np.isclose(spec.beta, 1 - 0.1 * spec.h)


def test_registry_parameters():
    assert set(REGISTRY) >= {"test1", "test2", "test3", "test4", "test5"}
    s = build("test1")
    assert s.grid.k == 0.05 and np.isclose(s.h, np.sqrt(2) / 4 * 0.05) and s.U.is_ball
    s = build("test3", k=0.1)
    assert np.allclose(s.U.upper, 0.3) and np.isclose(s.h, 0.02)
    s = build("test4", gamma1=0.5)
    assert s.cost.gamma1 == 0.5 and s.method == "ssn_l1_ball"
    assert build("test5").grid.counts == (32, 32, 32)
    with pytest.raises(KeyError):
        build("test9")


@pytest.mark.parametrize("make", [lambda: small_spec("comparison"), lambda: small_spec("ssn_smooth"), box_spec])
def test_sweep_matches_python_reference(make, rng):
    """The compiled sweep and the per-sector Python path agree at every node."""
    spec = make()
    grid = spec.grid
    V = ScalarField(grid, rng.uniform(0, 2, grid.size))
    Vn, Un, _, _ = Operator(spec)(V.values, keep_warm=False)
    for node in rng.choice(grid.size, 25, replace=False):
        x = grid.node(node)
        costs = [assemble(V, node, s, spec.dyn, spec.cost, spec.h) for s in decompose(spec.dyn, spec.U, x) if s.active]
        best = minimize_node(costs, spec.minimizer)
        assert np.isclose(Vn[node], best.value, atol=1e-8)


@settings(max_examples=15)
@given(seed=st.integers(0, 2**31), shift=st.floats(0.0, 1.0))
def test_bellman_monotone_and_contractive(seed, shift):
    spec = small_spec()
    rng = np.random.default_rng(seed)
    V = rng.uniform(0, 2, spec.grid.size)
    W = V + shift * rng.uniform(0, 1, spec.grid.size)
    GV, GW = bellman(spec, V), bellman(spec, W)
    assert np.all(GV <= GW + 1e-9)
    assert np.max(np.abs(GV - GW)) <= spec.beta * np.max(np.abs(V - W)) + 1e-9


def test_value_iteration_converges_with_symmetric_solution():
    spec = small_spec(k=0.1)
    rep = value_iteration(spec)
    assert rep.converged and rep.residual_history[-1] <= spec.stop_tol
    assert np.all(np.diff(rep.residual_history) <= 1e-12)
    V = rep.V.as_array()
    assert np.allclose(V, V[::-1, :], atol=1e-6) and np.allclose(V, V.T, atol=1e-6)
    assert V.min() >= 0 and np.isclose(V[10, 10], 0.0)
    assert len(rep.avg_subiterations) == rep.sweeps


def test_minimum_time_against_distance():
    grid = Grid.box(-1, 1, 2, 0.1)
    spec = ProblemSpec(grid, eikonal(2), ControlSet.ball(2), RunningCost("minimum_time"), np.sqrt(2) / 4 * 0.1,
                       mode="minimum_time", target=TargetSet("ball", radius=0.2),
                       minimizer=MinimizerConfig(method="sphere_newton"))
    V0 = initial_field(spec)
    assert np.all(V0.values[spec.target_mask()] == 0) and np.all(V0.values[~spec.target_mask()] == 1)
    rep = value_iteration(spec)
    assert rep.converged
    assert np.all(rep.V.values[spec.target_mask()] == 0)
    T = -np.log(np.clip(1 - rep.V.values, 1e-300, None))
    exact = np.maximum(np.linalg.norm(grid.nodes(), axis=1) - 0.2, 0.0)
    assert np.mean(np.abs(T - exact)) < 0.05


def test_nonconvergence_is_reported():
    spec = small_spec(max_sweeps=3)
    rep = value_iteration(spec)
    assert not rep.converged and rep.sweeps == 3


def test_rejects_nonfinite_start():
    spec = small_spec()
    V0 = ScalarField(spec.grid, np.full(spec.grid.size, np.nan))
    with pytest.raises(ValueError):
        value_iteration(spec, V0)


def test_residual_norms():
    assert residual(np.array([0.0, 2.0]), np.zeros(2)) == 2.0
    assert residual(np.array([0.0, 2.0]), np.zeros(2), "l1_mean") == 1.0
