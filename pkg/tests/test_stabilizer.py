from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from flataffine import affine_core as ac
from flataffine import devmap as dm
from flataffine import stabilizer as st
from flataffine.lsa import catalog_lsa

F = Fraction
HALF_PLANE = st.domain_spec("orthant:1", 2)
QUADRANT = st.domain_spec("orthant:2", 2)
PARABOLA = st.domain_spec("parabola", 2)
PUNCTURED = st.domain_spec("punctured-plane", 2)


def test_witnesses_and_membership():
    assert PARABOLA.contains([0, 0]) and not PARABOLA.contains([-1, 0])
    assert PUNCTURED.contains([1e-9, 0]) and not PUNCTURED.contains([0, 0])
    with pytest.raises(KeyError):
        st.domain_spec("annulus")


@pytest.mark.parametrize("name,n", [("orthant:1", 2), ("parabola", 2), ("punctured:2", 2), ("orthant:2", 3)])
def test_strata_lie_on_the_boundary(name, n, rng):
    """Boundary samples are limits of interior and exterior points."""
    spec = st.domain_spec(name, n)
    xs = spec.sample_boundary(rng, 20)
    assert np.max(spec.boundary_residual(xs)) < 1e-12
    assert not spec.contains_many(xs).any()
    near = np.vstack([xs + 1e-6 * d for d in rng.normal(size=(8, n))])
    assert spec.contains_many(near).any()


# --- open-set membership -------------------------------------------------------------

def test_preserves_boundary_examples():
    assert st.preserves_boundary(ac.identity(2), HALF_PLANE).passed
    assert st.preserves_boundary(ac.linear_map([[2, 0], [0, 3]]), HALF_PLANE).passed
    assert not st.preserves_boundary(ac.translation([1, 0]), HALF_PLANE).passed


def test_preserves_open_set_examples(rng):
    t = ac.AffineMap([[4, 2], [0, 2]], [2, 1])
    assert st.preserves_open_set(t, PARABOLA).passed
    assert not st.preserves_open_set(ac.linear_map([[-1, 0], [0, 1]]), HALF_PLANE).passed
    for _ in range(20):
        a = rng.normal(size=(2, 2))
        if abs(np.linalg.det(a)) > 1e-3:
            assert st.preserves_open_set(ac.linear_map(a), PUNCTURED).passed


def test_oracle_examples():
    assert st.oracle_preserves(ac.identity(2), QUADRANT).passed
    rot = ac.linear_map([[0.0, -1.0], [1.0, 0.0]])
    assert not st.oracle_preserves(rot, QUADRANT).passed
    assert not st.preserves_open_set(rot, QUADRANT).passed


def test_oracle_sees_thin_failures():
    # only fails where x1 < 0.02·|x2|, inside the first grid row
    t = ac.AffineMap([[0.647, -0.014], [0.702, -1.035]], [-0.012, -0.211])
    assert not st.oracle_preserves(t, HALF_PLANE).passed
    # the uniform grid alone is blind to it
    uniform = st.oracle_grid(HALF_PLANE, layer=0)
    assert st.oracle_preserves(t, HALF_PLANE, grid=uniform).passed
    assert not st.preserves_open_set(t, HALF_PLANE).passed


# --- stabilizer algebras --------------------------------------------------------

def test_punctured_plane_algebra_is_gl2():
    alg = st.stabilizer_algebra(st.domain_spec("punctured:1", 2))
    assert alg.dim == 4
    assert all(not any(f.b) for f in alg.basis)


def test_half_plane_constraints():
    alg = st.stabilizer_algebra(HALF_PLANE)
    assert alg.dim == 4
    assert all(f.m[0, 1] == 0 and f.b[0] == 0 for f in alg.basis)


def test_parabola_relations():
    alg = st.stabilizer_algebra(PARABOLA)
    assert alg.dim == 2
    for f in alg.basis:
        m, b = f.m, f.b
        assert m[1, 0] == 0 and m[1, 1] == m[0, 0] / 2 and b[0] == m[0, 0] / 2 and m[0, 1] == b[1]
    rows = sorted(tuple(f.vector()) for f in alg.basis)
    assert rows == sorted([(2, 0, 0, 1, 1, 0), (0, 1, 0, 0, 0, 1)])


@pytest.mark.parametrize("name,n,dim", [
    ("orthant:2", 2, 2), ("punctured:3", 2, 0), ("orthant:1", 3, 9), ("orthant:2", 3, 6),
    ("punctured:2", 2, 2), ("punctured:4", 3, 0), ("orthant:3", 3, 3), ("plane", 2, 6),
])
def test_dimension_closed_forms(name, n, dim):
    spec = st.domain_spec(name, n)
    assert st.stabilizer_algebra(spec).dim == dim == st.closed_form_dimension(spec)


@pytest.mark.parametrize("name,n", [("punctured:1", 3), ("punctured:2", 3), ("punctured:3", 3),
                                    ("orthant:1", 2), ("orthant:3", 3), ("parabola", 2)])
def test_basis_exact_and_lie_closed(name, n):
    alg = st.stabilizer_algebra(st.domain_spec(name, n))
    assert all(st.constraint_residual(f, alg.domain) == 0 for f in alg.basis)
    assert st.is_lie_subalgebra(alg).passed


def test_dimension_table_keys():
    table = st.algebra_dimension_table([QUADRANT, PARABOLA])
    assert table == {"orthant:2@R2": 2, "parabola@R2": 2}


def test_closure_examples():
    assert st.is_closed_under_matrix_product(st.stabilizer_algebra(PUNCTURED)).passed
    assert st.is_closed_under_matrix_product(st.stabilizer_algebra(HALF_PLANE)).passed
    assert not st.is_closed_under_matrix_product(st.stabilizer_algebra(PARABOLA)).passed


# --- flows -----------------------------------------------------------------------

def test_flow_examples():
    t = st.flow_of(st.AffineField(np.zeros((2, 2)), [1.0, -2.0]), 0.5)
    assert ac.distance(t, ac.translation([0.5, -1.0])) < 1e-15
    t = st.flow_of(st.AffineField(np.eye(2), [0, 0]), math.log(2))
    assert ac.distance(t, ac.linear_map(2 * np.eye(2))) < 1e-12
    t = st.flow_of(st.AffineField([[1, 0], [0, 0]], [0, 0]), 1.0)
    assert ac.distance(t, ac.linear_map(np.diag([math.e, 1.0]))) < 1e-12


def test_flow_group_law(rng):
    f = st.AffineField(rng.normal(size=(3, 3)), rng.normal(size=3))
    for s, t in rng.uniform(-2, 2, (10, 2)):
        lhs = st.flow_of(f, s + t)
        assert ac.distance(lhs, ac.compose(st.flow_of(f, s), st.flow_of(f, t))) < 1e-9


def test_completeness_examples(rng):
    for f in st.stabilizer_algebra(PUNCTURED).basis:
        assert st.is_complete_on(f, PUNCTURED).passed
    assert not st.is_complete_on(st.AffineField(np.zeros((2, 2)), [1, 0]), HALF_PLANE).passed
    assert st.is_complete_on(st.AffineField(np.eye(2), [0, 0]), QUADRANT).passed


@pytest.mark.parametrize("name,n", [("orthant:1", 2), ("orthant:2", 3), ("parabola", 2),
                                    ("punctured:2", 2), ("punctured-plane", 2)])
def test_basis_flows_preserve_the_domain(name, n):
    spec = st.domain_spec(name, n)
    for f in st.stabilizer_algebra(spec).basis:
        for t in (-2, -1, -0.5, 0.5, 1, 2):
            assert st.preserves_open_set(st.flow_of(f, t), spec).passed


# --- infinitesimal affine transformations ------------------------------------------

def test_flat_solution_spaces():
    assert len(st.solve_infinitesimal(np.zeros((2, 2, 2), dtype=int), 2, 2)) == 6
    assert len(st.solve_infinitesimal(np.zeros((3, 3, 3), dtype=int), 3, 2)) == 12
    assert all(f.degree <= 1 for f in st.solve_infinitesimal(np.zeros((2, 2, 2), dtype=int), 2, 3))
    with pytest.raises(ValueError):
        st.solve_infinitesimal(np.zeros((2, 2, 2), dtype=int), 2, 4)


@pytest.mark.parametrize("name", ["P1", "P2", "P3", "P4", "P5", "P6"])
def test_constant_fields_are_infinitesimal(name):
    gamma = dm.christoffels_from_lsa(catalog_lsa(name))
    sols = st.solve_infinitesimal(gamma, 2, 2)
    assert all(st.in_span(sols, st.constant_field(2, k), 2, 2) for k in range(2))


def test_solutions_satisfy_the_equation_numerically(rng):
    gamma = dm.christoffels_from_lsa(catalog_lsa("P3"))
    g = np.asarray(gamma, float)
    for f in st.solve_infinitesimal(gamma, 2, 2):
        for x in rng.uniform(-1, 1, (3, 2)):
            assert st.infinitesimal_residual(f, lambda p: g, x) < 1e-6


def test_non_solution_detected():
    g = np.asarray(dm.christoffels_from_lsa(catalog_lsa("P5")), float)
    field = st.PolyField(({(1, 1): F(1)}, {}))  # x·y ∂₁
    assert st.infinitesimal_residual(field, lambda p: g, [0.2, 0.3]) > 1e-2


def test_pullback_through_d5(rng):
    d5 = dm.PLANAR_MAPS["D5"]
    gamma = d5.connection.gamma_fn()
    worst = 0.0
    for _ in range(20):
        w = st.AffineField(rng.normal(size=(2, 2)), rng.normal(size=2))
        field = st.pullback_field(d5, d5.jacobian, w)
        for x in rng.uniform(-2, 2, (10, 2)):
            worst = max(worst, st.infinitesimal_residual(field, gamma, x))
    assert worst <= 1e-5
