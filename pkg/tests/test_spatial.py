import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, strategies as st

from semilinear_uq.errors import AssemblyError, IterationLimitError
from semilinear_uq.spatial import (
    Grid,
    add_diagonal,
    assemble_stiffness,
    h1_seminorm,
    rayleigh_quotient,
    second_eigvalue,
    smallest_eigpair,
)


def discrete_laplace_eig(h, k=1):
    return 4.0 / h**2 * np.sin(k * np.pi * h / 2) ** 2


def test_grid_basics():
    g = Grid.from_h(0.25)
    assert g.m == 3 and g.n == 3
    np.testing.assert_allclose(g.coords[:, 0], [0.25, 0.5, 0.75])
    g2 = Grid(2, 3)
    assert g2.coords.shape == (9, 2)
    # x1 runs fastest
    np.testing.assert_allclose(g2.coords[:3, 0], [0.25, 0.5, 0.75])
    np.testing.assert_allclose(g2.coords[:3, 1], 0.25)
    with pytest.raises(ValueError):
        Grid.from_h(0.3)
    with pytest.raises(ValueError):
        Grid(3, 4)


def test_normalize_sign_and_norm():
    g = Grid(1, 9)
    v = -np.ones(9)
    u = g.normalize(v)
    assert g.norm(u) == pytest.approx(1.0)
    assert u.sum() > 0
    with pytest.raises(ValueError):
        g.normalize(np.zeros(9))


def test_stiffness_1d_small():
    A = assemble_stiffness(Grid.from_h(0.25)).toarray()
    np.testing.assert_allclose(A, [[32, -16, 0], [-16, 32, -16], [0, -16, 32]])


def test_stiffness_2d_single_node():
    A = assemble_stiffness(Grid.from_h(0.5, d=2)).toarray()
    np.testing.assert_allclose(A, [[16.0]])


@pytest.mark.parametrize("d", [1, 2])
def test_stiffness_symmetric_positive(d):
    g = Grid(d, 6)
    A = assemble_stiffness(g, lambda x: 1.0 + x[:, 0] ** 2).toarray()
    np.testing.assert_allclose(A, A.T)
    assert np.linalg.eigvalsh(A).min() > 0


def test_stiffness_rejects_nonpositive_coefficient():
    with pytest.raises(AssemblyError):
        assemble_stiffness(Grid(1, 5), lambda x: x[:, 0] - 0.5)
    with pytest.raises(AssemblyError):
        assemble_stiffness(Grid(1, 5), 0.0)


def test_stiffness_2d_is_kronecker_sum():
    g1, g2 = Grid(1, 5), Grid(2, 5)
    A1 = assemble_stiffness(g1).toarray()
    eye = np.eye(5)
    np.testing.assert_allclose(assemble_stiffness(g2).toarray(), np.kron(eye, A1) + np.kron(A1, eye))


def test_variable_coefficient_matches_midpoint_formula():
    g = Grid.from_h(0.25)
    a = lambda x: 1.0 + x[:, 0]
    A = assemble_stiffness(g, a).toarray()
    mids = np.array([0.125, 0.375, 0.625, 0.875])
    am = 1 + mids
    expected = np.diag((am[:-1] + am[1:]) / 0.0625) - np.diag(am[1:-1] / 0.0625, 1) - np.diag(am[1:-1] / 0.0625, -1)
    np.testing.assert_allclose(A, expected)


def test_smallest_eigpair_closed_form_h_quarter():
    g = Grid.from_h(0.25)
    pair = smallest_eigpair(assemble_stiffness(g), g)
    assert pair.value == pytest.approx(64 * np.sin(np.pi / 8) ** 2, rel=1e-12)
    assert np.all(pair.vector > 0)


@pytest.mark.parametrize("m", [9, 49, 99])
def test_smallest_eigpair_matches_dense_solver(m):
    g = Grid(1, m)
    rng = np.random.default_rng(m)
    A = add_diagonal(assemble_stiffness(g), 50 * rng.random(m))
    pair = smallest_eigpair(A, g, tol=1e-12)
    ref = sla.eigh(A.toarray(), eigvals_only=True, subset_by_index=[0, 0])[0]
    assert pair.value == pytest.approx(ref, rel=1e-11)
    assert g.norm(pair.vector) == pytest.approx(1.0)
    assert pair.residual_norm <= 1e-12 * abs(pair.value)


def test_eigpair_with_start_vector_and_pi_squared():
    g = Grid.from_h(1 / 100)
    A = assemble_stiffness(g)
    pair = smallest_eigpair(A, g, v0=np.sin(np.pi * g.coords[:, 0]))
    assert abs(pair.value - np.pi**2) <= 1e-3
    assert pair.value == pytest.approx(discrete_laplace_eig(g.h), rel=1e-12)


def test_eigpair_2d():
    g = Grid(2, 15)
    pair = smallest_eigpair(assemble_stiffness(g), g)
    assert pair.value == pytest.approx(2 * discrete_laplace_eig(g.h), rel=1e-10)


def test_iteration_limit_carries_best():
    g = Grid(1, 49)
    A = assemble_stiffness(g)
    with pytest.raises(IterationLimitError) as info:
        smallest_eigpair(A, g, tol=1e-30, max_iters=3)
    assert info.value.best is not None


def test_second_eigenvalue():
    g = Grid.from_h(1 / 100)
    A = assemble_stiffness(g)
    ground = smallest_eigpair(A, g)
    lam2 = second_eigvalue(A, g, ground)
    assert lam2 == pytest.approx(discrete_laplace_eig(g.h, 2), rel=1e-8)


@given(st.floats(-5, 5), st.integers(3, 30))
def test_rayleigh_quotient_shift(c, m):
    g = Grid(1, m)
    A = assemble_stiffness(g)
    v = np.linspace(1, 2, m)
    assert rayleigh_quotient(add_diagonal(A, c), v) == pytest.approx(rayleigh_quotient(A, v) + c, rel=1e-12, abs=1e-9)


def test_add_diagonal_shape_check():
    g = Grid(1, 4)
    with pytest.raises(ValueError):
        add_diagonal(assemble_stiffness(g), np.ones(3))


def test_h1_seminorm_of_sine():
    g = Grid.from_h(1 / 200)
    u = np.sqrt(2) * np.sin(np.pi * g.coords[:, 0])
    assert h1_seminorm(g, u) ** 2 == pytest.approx(np.pi**2, rel=1e-3)
