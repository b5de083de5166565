import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from semilinear_uq.coeff import AffinePotential, sample_y
from semilinear_uq.errors import IterationLimitError
from semilinear_uq.solver import (
    ProblemSpec,
    admissible,
    admissible_energy,
    amplitude_bound,
    energy,
    gap_report,
    identity_defect,
    solve_ground,
    verify_amplitude_bound,
)
from semilinear_uq.spatial import Grid, add_diagonal, smallest_eigpair


def constant_spec(grid, b0, eta=1.0, p=3):
    return ProblemSpec(grid, AffinePotential.algebraic(1.0, 2.0, 0, b0=b0), eta, p)


def test_admissibility_table():
    assert admissible(1, 7) and admissible(2, 7)
    assert admissible(3, 3) and not admissible(3, 4)
    assert admissible_energy(3, 2) and not admissible_energy(3, 3)
    assert not admissible(1, 0)


def test_problem_spec_validation(grid100):
    pot = AffinePotential.algebraic(1.0, 2.0, 2)
    with pytest.raises(ValueError):
        ProblemSpec(grid100, pot, 0.0, 3)
    with pytest.raises(ValueError):
        ProblemSpec(grid100, pot, 1.0, 1)
    with pytest.raises(ValueError):
        ProblemSpec(grid100, pot, 1.0, 2.5)


def test_damping_range(sine_spec):
    for bad in (0.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            solve_ground(sine_spec, np.zeros(4), damping=bad)


def test_constant_shift_moves_lambda_only(grid100):
    a = solve_ground(constant_spec(grid100, 0.5), [])
    b = solve_ground(constant_spec(grid100, 3.5), [])
    assert b.lam - a.lam == pytest.approx(3.0, rel=1e-9)
    assert grid100.norm(a.u - b.u) < 1e-8


def test_ground_state_properties(sine_spec):
    y = sample_y(16, 1, 1)[0]
    gs = solve_ground(sine_spec, y)
    g = sine_spec.grid
    assert g.norm(gs.u) == pytest.approx(1.0, rel=1e-12)
    assert np.all(gs.u > 0)
    assert gs.energy_monotone
    assert gs.residual <= sine_spec.default_tol
    assert abs(identity_defect(sine_spec, gs)) <= 10 * sine_spec.default_tol * abs(gs.lam)
    assert gs.lam > np.pi**2
    assert gs.energy == pytest.approx(energy(sine_spec, gs.u, y=y), rel=1e-14)


@pytest.mark.parametrize("p", [2, 3, 4])
def test_weyl_sandwich(grid100, p):
    """lambda_lin <= lambda <= lambda_lin + eta max u^(p-1): Weyl on the frozen operator."""
    spec = ProblemSpec(grid100, AffinePotential.algebraic(1.0, 2.0, 8), 2.0, p)
    y = sample_y(8, 5, 1)[0]
    gs = solve_ground(spec, y)
    lin = smallest_eigpair(add_diagonal(spec.stiffness, spec.potential(y)), grid100, 1e-12).value
    assert lin <= gs.lam <= lin + spec.eta * gs.u.max() ** (p - 1) + 1e-9


def test_small_eta_recovers_laplace_ground(grid100):
    spec = constant_spec(Grid.from_h(1 / 200), 0.0, eta=1e-12)
    gs = solve_ground(spec, [])
    x = spec.grid.coords[:, 0]
    assert abs(gs.lam - np.pi**2) <= 1e-3
    assert np.max(np.abs(gs.u - np.sqrt(2) * np.sin(np.pi * x))) <= 1e-2


def test_deterministic(sine_spec):
    y = sample_y(16, 3, 1)[0]
    a, b = solve_ground(sine_spec, y), solve_ground(sine_spec, y)
    assert a.lam == b.lam
    np.testing.assert_array_equal(a.u, b.u)


def test_warm_start_agrees(sine_spec):
    y = sample_y(16, 4, 1)[0]
    cold = solve_ground(sine_spec, y)
    warm = solve_ground(sine_spec, 0.9 * y, u0=cold.u)
    ref = solve_ground(sine_spec, 0.9 * y)
    assert warm.lam == pytest.approx(ref.lam, rel=1e-10)


def test_iteration_limit_reports_best(sine_spec):
    with pytest.raises(IterationLimitError) as info:
        solve_ground(sine_spec, np.zeros(16), max_iters=1)
    assert info.value.best is not None and info.value.best.lam > 0


def test_damping_one_agrees_with_default(sine_spec):
    y = sample_y(16, 9, 1)[0]
    assert solve_ground(sine_spec, y, damping=1.0).lam == pytest.approx(solve_ground(sine_spec, y).lam, rel=1e-9)


@settings(max_examples=10)
@given(st.integers(0, 10_000))
def test_gap_above_witness(seed):
    spec = ProblemSpec(Grid.from_h(1 / 50), AffinePotential.algebraic(1.0, 2.0, 8), 1.0, 3)
    y = sample_y(8, seed, 1)[0]
    gs = solve_ground(spec, y, damping=1.0)
    rep = gap_report(spec, gs)
    assert rep.gap > 0
    assert rep.gap >= rep.lower_witness - 1e-8


def test_large_eta_amplitude(grid100):
    spec = ProblemSpec(grid100, AffinePotential.algebraic(1.0, 2.0, 4), 1e3, 3)
    gs = solve_ground(spec, sample_y(4, 0, 1)[0])
    assert verify_amplitude_bound(spec, gs)
    assert gs.u.max() <= amplitude_bound(spec, gs)


def test_two_dimensional_solve():
    spec = ProblemSpec(Grid(2, 15), AffinePotential.algebraic(1.0, 2.0, 3, d=2), 1.0, 3)
    gs = solve_ground(spec, [0.2, -0.3, 0.1])
    assert np.all(gs.u > 0)
    assert abs(identity_defect(spec, gs)) <= 10 * spec.default_tol * abs(gs.lam)


@pytest.mark.parametrize("p", [2, 5])
def test_strong_nonlinearity_converges_via_newton_finish(grid100, p):
    spec = ProblemSpec(grid100, AffinePotential.algebraic(1.0, 2.0, 4), 1e3, p)
    gs = solve_ground(spec, sample_y(4, 0, 1)[0])
    assert gs.newton_steps > 0
    assert np.all(gs.u > 0)
    assert abs(identity_defect(spec, gs)) <= 1e-8 * gs.lam
    # the accepted state is the ground eigenvector of its own frozen operator
    pair = smallest_eigpair(spec.operator_O(spec.potential(gs.y), gs.u), grid100, 1e-12)
    assert pair.value == pytest.approx(gs.lam, rel=1e-10)


def test_mild_problems_do_not_need_newton(sine_spec):
    assert solve_ground(sine_spec, np.zeros(16)).newton_steps == 0
