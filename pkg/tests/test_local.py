import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from slhjb.controls import ControlSet, car, decompose, eikonal, triple_integrator
from slhjb.grid import Grid, ScalarField, sector_interpolant
from slhjb.local import LocalCost, RunningCost, assemble

CASES = [
    (eikonal(2), ControlSet.ball(2), Grid.box(-1, 1, 2, 0.25)),
    (triple_integrator(), ControlSet.symmetric_box([0.3, 0.3]), Grid.box(-1, 1, 3, 0.5)),
    (car(), ControlSet.symmetric_box([0.3, 0.3]), Grid.box(0, 2 * np.pi, 3, np.pi / 2)),
]


def test_running_cost_coefficients():
    c = RunningCost(gamma2=2.0, gamma1=0.5, lam=0.1)
    assert c.kind == "quadratic_l1"
    assert c.coefficients(0.1) == (0.2, 0.05, 0.0)
    assert np.isclose(c.discount(0.1), 0.99)
    mt = RunningCost("minimum_time")
    assert np.isclose(mt.discount(0.1), np.exp(-0.1))
    q, a, const = mt.coefficients(0.1)
    assert q == 0 and a == 0 and np.isclose(const, 1 - np.exp(-0.1))
    with pytest.raises(ValueError):
        RunningCost(gamma1=-1)


def test_local_cost_family_tags():
    assert LocalCost.from_coeffs(a=1, c=1).family == "quadratic"
    assert LocalCost.from_coeffs(a=1, c=1, l=0.1, s=0.1).family == "quadratic_l1"
    assert LocalCost.from_coeffs(b=1, d=1).family == "minimum_time"
    assert LocalCost.from_coeffs(l=0.2, s=0.2, d=1).family == "minimum_time_l1"
    with pytest.raises(ValueError):
        LocalCost(np.ones(3), np.zeros(3), 0.0, bilinear=1.0)


@given(case=st.integers(0, 2), seed=st.integers(0, 2**31), gamma1=st.sampled_from([0.0, 0.3]),
       mode=st.sampled_from(["quadratic", "minimum_time"]))
def test_local_cost_matches_direct_evaluation(case, seed, gamma1, mode):
    """For every control of a sector the surrogate equals beta * I[V](x + h f) + h l(x, u)."""
    dyn, U, grid = CASES[case]
    rng = np.random.default_rng(seed)
    V = ScalarField(grid, rng.normal(size=grid.size))
    node = int(rng.integers(grid.size))
    x = grid.node(node)
    cost = RunningCost(mode, gamma1=gamma1)
    h = 0.01
    for sector in decompose(dyn, U, x):
        if sector.empty:
            continue
        lc = assemble(V, node, sector, dyn, cost, h)
        interp = sector_interpolant(V, node, sector.signs)
        u = np.clip(U.sample(5, rng), sector.lo, sector.hi)
        arrival = x + h * dyn(np.tile(x, (5, 1)), u)
        running = h * cost(np.tile(x, (5, 1)), u) + (1 - cost.discount(h) if cost.minimum_time else 0.0)
        expected = cost.discount(h) * interp(arrival) + running
        assert np.allclose(lc(u), expected, atol=1e-12)


def test_assemble_rejects_empty_sector():
    dyn, U, grid = CASES[1]
    V = ScalarField(grid, np.zeros(grid.size))
    node = int(grid.flat_index([0, 3, 2]))
    empty = [s for s in decompose(dyn, U, grid.node(node)) if s.empty]
    assert empty
    with pytest.raises(ValueError):
        assemble(V, node, empty[0], dyn, RunningCost(), 0.01)
