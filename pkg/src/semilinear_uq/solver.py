"""Ground state of -div(a grad u) + b(y) u + eta u^p = lambda u with ||u||_L2 = 1.

The discrete problem is solved by a damped self-consistent field (SCF)
iteration: freeze the nonlinearity at the current iterate, take the ground
eigenvector of the resulting linear operator, mix, renormalise.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .coeff import AffinePotential, check_param, evaluate_potential
from .errors import AdmissibilityError, GapError, IterationLimitError, PositivityError, SolverError
from .spatial import Coefficient, EigPair, Grid, add_diagonal, assemble_stiffness, smallest_eigpair

log = logging.getLogger(__name__)

DEFAULT_TOL = {1: 1e-10, 2: 1e-8}
MAX_ITERS = 500
EIG_TOL_FLOOR = 1e-12
# SCF iterations after which a stalled run is finished by Newton on the (u, lambda) system
NEWTON_SWITCH = 50
NEWTON_MAX_STEPS = 30


def admissible(d: int, p: int) -> bool:
    """(d, p) with H^1_0 embedded in L^{2p}."""
    if p < 1:
        return False
    if d <= 2:
        return True
    return p <= d / (d - 2)


def admissible_energy(d: int, p: int) -> bool:
    """(d, p) with H^1_0 embedded in L^{2(p+1)}."""
    if p < 1:
        return False
    if d <= 2:
        return True
    return p <= 2 / (d - 2)


@dataclass
class ProblemSpec:
    grid: Grid
    pot: AffinePotential
    eta: float
    p: int
    a: Coefficient = 1.0
    need_energy: bool = False

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if int(self.p) != self.p or self.p < 2:
            raise ValueError("p must be an integer >= 2")
        self.p = int(self.p)
        if not admissible(self.grid.d, self.p):
            raise AdmissibilityError(f"(d, p) = ({self.grid.d}, {self.p}) is not admissible")
        if self.need_energy and not admissible_energy(self.grid.d, self.p):
            raise AdmissibilityError(f"(d, p) = ({self.grid.d}, {self.p}) not admissible for energies")

    @cached_property
    def stiffness(self) -> sp.csr_matrix:
        return assemble_stiffness(self.grid, self.a)

    @property
    def default_tol(self) -> float:
        return DEFAULT_TOL[self.grid.d]

    def potential(self, y) -> np.ndarray:
        return evaluate_potential(self.pot, y, self.grid)

    def operator_O(self, b: np.ndarray, u: np.ndarray) -> sp.csr_matrix:
        return add_diagonal(self.stiffness, b + self.eta * u ** (self.p - 1))

    def operator_T(self, b: np.ndarray, u: np.ndarray) -> sp.csr_matrix:
        return add_diagonal(self.stiffness, b + self.p * self.eta * u ** (self.p - 1))


@dataclass
class GroundState:
    u: np.ndarray
    lam: float
    energy: float
    scf_iters: int
    residual: float
    y: np.ndarray
    energy_monotone: bool = True
    damping: float = 0.5
    history: list = field(default_factory=list, repr=False)
    newton_steps: int = 0


def energy(spec: ProblemSpec, u: np.ndarray, y=None, b: np.ndarray | None = None) -> float:
    """int a|grad u|^2 + int b u^2 + 2 eta/(p+1) int |u|^{p+1} (discrete)."""
    grid = spec.grid
    if b is None:
        b = spec.potential(np.zeros(0) if y is None else y)
    quad = grid.inner(spec.stiffness @ u, u) + grid.integrate(b * u * u)
    return quad + 2.0 * spec.eta / (spec.p + 1) * grid.integrate(np.abs(u) ** (spec.p + 1))


def identity_defect(spec: ProblemSpec, gs: GroundState) -> float:
    """lambda - E - eta (p-1)/(p+1) int u^{p+1}; zero at an exact ground state."""
    p = spec.p
    return gs.lam - gs.energy - spec.eta * (p - 1) / (p + 1) * spec.grid.integrate(gs.u ** (p + 1))


def _relative_residual(spec, b, u, lam) -> float:
    r = spec.stiffness @ u + b * u + spec.eta * u**spec.p - lam * u
    return spec.grid.norm(r) / abs(lam)


def solve_ground(spec: ProblemSpec, y, tol: float | None = None, damping: float = 0.5,
                 u0: np.ndarray | None = None, max_iters: int = MAX_ITERS,
                 eig_tol: float | None = None) -> GroundState:
    """Damped SCF for the ground state at parameter ``y``.

    ``u0`` warm-starts the iteration; otherwise it starts from the ground mode
    of the linear (eta = 0) operator. The mixing weight is halved whenever the
    energy increases. Stops when successive iterates and eigenvalues agree to
    ``tol`` and the relative nonlinear residual is below ``tol``.

    For strong nonlinearities (large eta) plain mixing oscillates and the
    halving drives the weight so low that progress stalls. If the loop has
    not converged after ``NEWTON_SWITCH`` iterations, Newton's method on the
    bordered system is tried from the current iterate; its result is accepted
    only if one further SCF step meets the usual stopping test, otherwise the
    SCF loop carries on.
    """
    if not 0.0 < damping <= 1.0:
        raise ValueError("damping must lie in (0, 1]")
    tol = spec.default_tol if tol is None else tol
    # rounding floor: relative eigen-residuals below ~1e-12 are not reliably attainable
    eig_tol = max(0.1 * tol, EIG_TOL_FLOOR) if eig_tol is None else eig_tol
    y = check_param(y)
    grid = spec.grid
    b = spec.potential(y)

    if u0 is None:
        lin = smallest_eigpair(add_diagonal(spec.stiffness, b), grid, eig_tol)
        u = lin.vector
    else:
        u = grid.normalize(np.abs(np.asarray(u0, dtype=float)))
    E = energy(spec, u, b=b)
    lam_prev = None
    alpha = damping
    monotone = True
    history = []
    pair = None
    newton_steps = 0
    for it in range(1, max_iters + 1):
        pair = smallest_eigpair(spec.operator_O(b, u), grid, eig_tol, v0=u)
        v = pair.vector
        while True:
            u_new = grid.normalize((1.0 - alpha) * u + alpha * v)
            E_new = energy(spec, u_new, b=b)
            if E_new <= E + 1e-14 * abs(E) or alpha < 1e-3:
                break
            alpha *= 0.5
            if it > 1:
                monotone = False
        step = grid.norm(u_new - u)
        history.append((E_new, pair.value, step))
        dlam = np.inf if lam_prev is None else abs(pair.value - lam_prev)
        res = _relative_residual(spec, b, v, pair.value)
        lam_prev = pair.value
        u, E = u_new, E_new
        if step <= tol and dlam <= tol * abs(pair.value) and res <= tol:
            break
        if it == NEWTON_SWITCH and newton_steps == 0:
            polished = _newton_polish(spec, b, u, pair.value, tol, eig_tol)
            if polished is not None:
                pair, res, newton_steps = polished
                break
    else:
        best = GroundState(v, pair.value, energy(spec, v, b=b), max_iters,
                           _relative_residual(spec, b, v, pair.value), y, monotone, alpha, history)
        raise IterationLimitError(f"SCF did not converge in {max_iters} iterations", best=best)

    u_final = pair.vector
    gs = GroundState(u_final, pair.value, energy(spec, u_final, b=b), it, res, y,
                     monotone, alpha, history, newton_steps)
    if not np.all(u_final > 0):
        raise PositivityError(
            f"converged state has min value {u_final.min():.3e} <= 0 at y={y}")
    if not monotone:
        log.info("SCF energy was not monotone at y=%s (damping reduced to %g)", y, alpha)
    return gs


def _newton_polish(spec: ProblemSpec, b: np.ndarray, u: np.ndarray, lam: float, tol: float,
                   eig_tol: float):
    """Newton on F(u, lam) = (O(u) u - lam u, (||u||^2 - 1)/2), then an SCF acceptance test.

    The bordered Jacobian [[T(u) - lam, -u], [h^d u^T, 0]] is nonsingular near
    the ground state because lambda_T > lambda there. Returns (pair, residual,
    steps) or None if Newton fails or lands on something that is not a fixed
    point of the SCF map.
    """
    grid = spec.grid
    n = grid.n
    w = grid.cell_volume
    u = u.copy()
    for k in range(1, NEWTON_MAX_STEPS + 1):
        F = spec.stiffness @ u + b * u + spec.eta * u**spec.p - lam * u
        c = 0.5 * (w * float(u @ u) - 1.0)
        J = sp.bmat([[add_diagonal(spec.operator_T(b, u), -lam), -u[:, None]],
                     [w * u[None, :], None]], format="csc")
        try:
            d = spla.spsolve(J, -np.concatenate([F, [c]]))
        except RuntimeError:
            return None
        if not np.all(np.isfinite(d)):
            return None
        u += d[:n]
        lam += float(d[n])
        if grid.norm(d[:n]) <= 1e-2 * tol and abs(d[n]) <= 1e-2 * tol * abs(lam):
            break
    else:
        return None
    if not np.all(u > 0):
        return None
    try:
        pair = smallest_eigpair(spec.operator_O(b, u), grid, eig_tol, v0=u)
    except SolverError:
        return None
    res = _relative_residual(spec, b, pair.vector, pair.value)
    ok = (grid.norm(pair.vector - u) <= tol and abs(pair.value - lam) <= tol * abs(lam)
          and res <= tol)
    return (pair, res, k) if ok else None


def linearized_ground_T(spec: ProblemSpec, gs: GroundState, tol: float | None = None) -> EigPair:
    """Ground eigenpair of -div(a grad) + b(y) + p eta u^{p-1}."""
    tol = spec.default_tol if tol is None else tol
    b = spec.potential(gs.y)
    return smallest_eigpair(spec.operator_T(b, gs.u), spec.grid, max(0.1 * tol, EIG_TOL_FLOOR), v0=gs.u)


@dataclass
class GapReport:
    lam: float
    lam_T: float
    gap: float
    lower_witness: float
    y: np.ndarray


def gap_report(spec: ProblemSpec, gs: GroundState, tol: float | None = None) -> GapReport:
    """lambda_T - lambda together with the lower witness (p-1) eta int u^{p-1} u_T^2."""
    tol = spec.default_tol if tol is None else tol
    t_pair = linearized_ground_T(spec, gs, tol)
    u_T = t_pair.vector
    witness = (spec.p - 1) * spec.eta * spec.grid.integrate(gs.u ** (spec.p - 1) * u_T**2)
    gap = t_pair.value - gs.lam
    rep = GapReport(gs.lam, t_pair.value, gap, witness, gs.y)
    if gap <= 0:
        raise GapError(f"nonpositive gap {gap:.3e} at y={gs.y}")
    if gap < witness - 10 * tol * max(1.0, abs(gs.lam)):
        raise GapError(f"gap {gap:.6e} below witness {witness:.6e} at y={gs.y}")
    return rep


def amplitude_bound(spec: ProblemSpec, gs: GroundState) -> float:
    return (gs.lam / spec.eta) ** (1.0 / (spec.p - 1))


def verify_amplitude_bound(spec: ProblemSpec, gs: GroundState) -> bool:
    """max u <= (lambda/eta)^{1/(p-1)}, up to a 1e-8 relative slack."""
    return float(np.max(gs.u)) <= amplitude_bound(spec, gs) * (1.0 + 1e-8)
