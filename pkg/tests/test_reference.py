import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from slhjb.grid import Grid, ScalarField, VectorField
from slhjb.reference import (
    ExactEikonalSolution, error_norms, exact_control, exact_gradient, exact_value, hjb_residual,
)

SOL = ExactEikonalSolution()


def test_constants_from_independent_formulas():
    # inside r_bar v = A r^2 solves lam A + 2 A^2 / gamma = 1/2
    lam, gam = 0.1, 2.0
    A = max(np.roots([2.0 / gam, lam, -0.5]).real)
    assert np.isclose(SOL.A, A, rtol=1e-14)
    assert np.isclose(SOL.A, 0.6588723439378912, rtol=1e-14)
    # the constraint activates where |grad v| = 2 A r reaches gamma
    assert np.isclose(SOL.r_bar, gam / (2 * SOL.A), rtol=1e-14)
    assert np.isclose(SOL.r_bar, 1.5177446878757828, rtol=1e-14)


def test_c1_matching():
    assert np.isclose(SOL.inner(SOL.r_bar), SOL.outer(SOL.r_bar), atol=1e-12)
    assert np.isclose(SOL.inner_slope(SOL.r_bar), SOL.outer_slope(SOL.r_bar), atol=1e-12)


@pytest.mark.parametrize("dim", [2, 3])
def test_hjb_residual_vanishes(dim, rng):
    x = rng.uniform(-2, 2, (1000, dim))
    assert np.max(np.abs(hjb_residual(SOL, x))) < 1e-10
    assert hjb_residual(SOL, np.zeros(dim)) == 0.0


@given(lam=st.floats(0.05, 1.0), gam=st.floats(0.5, 4.0))
def test_residual_for_other_parameters(lam, gam):
    sol = ExactEikonalSolution(lam, gam)
    r = np.linspace(0.01, 3 * sol.r_bar, 50)
    x = np.stack([r, np.zeros_like(r)], axis=1)
    scale = 1.0 + np.abs(exact_value(sol, x))
    assert np.max(np.abs(hjb_residual(sol, x)) / scale) < 1e-8


def test_exact_control_is_feasible_and_saturates(rng):
    x = rng.uniform(-1, 1, (500, 2)) * 2
    u = exact_control(SOL, x)
    assert np.all(np.linalg.norm(u, axis=1) <= 1 + 1e-12)
    inside = np.linalg.norm(x, axis=1) < SOL.r_bar
    assert np.allclose(u[inside], -exact_gradient(SOL, x[inside]) / SOL.gamma)
    assert np.allclose(np.linalg.norm(u[~inside], axis=1), 1.0)
    assert np.allclose(exact_control(SOL, np.zeros(2)), 0.0)


def test_error_norms():
    g = Grid.box(-1, 1, 2, 0.5)
    f = ScalarField(g, np.ones(g.size))
    e = error_norms(f, np.zeros(g.size))
    assert np.isclose(e["L1"], g.size * 0.25)
    assert e["mean"] == 1.0 and e["Linf"] == 1.0
    v = VectorField(g, np.tile([3.0, 4.0], (g.size, 1)))
    assert error_norms(v, lambda x: np.zeros((len(x), 2)))["Linf"] == 5.0
    assert error_norms(np.ones(g.size), np.zeros(g.size), grid=g)["mean"] == 1.0
