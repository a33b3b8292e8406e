import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from slhjb.grid import Grid, ScalarField, all_sectors, eval_arrival, index_set, sector_interpolant


def test_counts_and_nodes():
    g = Grid.box(-1, 1, 2, 0.5)
    assert g.counts == (5, 5)
    assert g.size == 25
    x = g.nodes()
    assert np.allclose(x[0], [-1, -1]) and np.allclose(x[-1], [1, 1])
    assert np.allclose(x[1], [-1, -0.5])  # last axis fastest
    assert np.allclose(g.node(g.flat_index([2, 3])), [0.0, 0.5])


def test_rejects_bad_spacing():
    with pytest.raises(ValueError):
        Grid.box(-1, 1, 2, 0.3)
    with pytest.raises(ValueError):
        Grid.box(0, 1, 4, 0.5)


def test_neighbor_table_boundaries():
    g = Grid.box(0, 1, 2, 0.5)
    nb = g.neighbor_table()
    corner = g.flat_index([0, 0])
    assert nb[corner, 0, 1] == -1 and nb[corner, 1, 1] == -1
    assert nb[corner, 0, 0] == g.flat_index([1, 0])
    assert nb[corner, 1, 0] == g.flat_index([0, 1])


def test_sector_ordering():
    assert all_sectors(2) == [(-1, -1), (1, -1), (1, 1), (-1, 1)]
    assert [index_set(s) for s in all_sectors(2)] == [(), (1,), (1, 2), (2,)]


affine = st.tuples(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))


@given(coef=affine, node=st.tuples(st.integers(1, 3), st.integers(1, 3), st.integers(1, 3)),
       signs=st.tuples(st.sampled_from([-1, 1]), st.sampled_from([-1, 1]), st.sampled_from([-1, 1])))
def test_sector_interpolant_is_exact_on_affine_fields(coef, node, signs):
    g = Grid.box(-1, 1, 3, 0.5)
    c = np.array(coef[:3])
    f = ScalarField.from_function(g, lambda x: x @ c + coef[3])
    interp = sector_interpolant(f, np.array(node), signs)
    assert np.allclose(interp.coeffs, c, atol=1e-10)
    assert np.isclose(interp.offset, coef[3], atol=1e-10)


@given(coef=affine, pts=st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), min_size=1, max_size=20))
def test_global_interpolant_reproduces_affine(coef, pts):
    g = Grid.box(-1, 1, 2, 0.25)
    c = np.array(coef[:2])
    f = ScalarField.from_function(g, lambda x: x @ c + coef[2])
    x = np.array(pts)
    assert np.allclose(eval_arrival(f, x), x @ c + coef[2], atol=1e-10)


def test_global_interpolant_hits_nodes_and_is_continuous(rng):
    g = Grid.box(-1, 1, 3, 0.5)
    f = ScalarField(g, rng.normal(size=g.size))
    assert np.allclose(eval_arrival(f, g.nodes()), f.values)
    x = rng.uniform(-1, 1, (200, 3))
    eps = 1e-9 * rng.normal(size=x.shape)
    assert np.max(np.abs(eval_arrival(f, x) - eval_arrival(f, x + eps))) < 1e-6


def test_patch_uses_ghost_values_outside():
    g = Grid.box(0, 1, 2, 0.5)
    f = ScalarField.from_function(g, lambda x: x[:, 0] + 10 * x[:, 1])
    # node (1, 1) sits on the upper corner: the +e_1 neighbour is a ghost carrying V_D
    corner = g.flat_index([2, 2])
    vd = f.values[corner]
    assert np.isclose(eval_arrival(f, np.array([1.0, 1.0]), node=corner), vd)
    # points are clamped into the domain before evaluation
    assert np.isclose(eval_arrival(f, np.array([1.3, 1.0]), node=corner), vd)
    inner = np.array([0.75, 1.0])
    assert np.isclose(eval_arrival(f, inner, node=corner), inner[0] + 10 * inner[1])
