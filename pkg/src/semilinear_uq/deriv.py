"""Parametric derivatives of the ground state by finite differences, and the
scale-free ratio r(nu) = |d^nu q(y)| / (|nu|! prod ||b_i||_inf^nu_i).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .errors import AdmissibilityError, ConstraintError, StencilError
from .multiindex import MultiIndex, all_multi_indices
from .solver import GroundState, ProblemSpec, admissible_energy, solve_ground
from .spatial import h1_seminorm

TARGETS = ("lambda", "energy", "u_L2norm", "u_H1norm")
# derived quantity used by the energy cross-check
_AUX_TARGETS = ("u_pow_integral",)
MAX_ORDER = 3
STEP_RANGE = (1e-5, 1e-2)
FD_TOL = 1e-12
ENERGY_CHECK_STEP = 1e-2


def default_step(order: int) -> float:
    return 1e-3 if order <= 1 else 3e-3


@lru_cache(maxsize=None)
def central_stencil(k: int) -> tuple[tuple[int, ...], tuple[float, ...], int]:
    """Offsets, weights and accuracy order of the central stencil for d^k/dx^k.

    k=1 uses 3 points, k=2 uses 5, k=3 uses 7. Weights solve the moment
    (Vandermonde) system sum_i w_i o_i^j = k! delta_jk, j = 0..2r.
    """
    if k not in (1, 2, 3):
        raise ValueError("stencils are provided for derivative orders 1..3")
    r = {1: 1, 2: 2, 3: 3}[k]
    offsets = np.arange(-r, r + 1, dtype=float)
    V = np.vander(offsets, increasing=True).T
    rhs = np.zeros(2 * r + 1)
    rhs[k] = math.factorial(k)
    w = np.linalg.solve(V, rhs)
    w[np.abs(w) < 1e-13] = 0.0
    # accuracy: first j > k with a nonvanishing moment, minus k
    j = 2 * r + 1
    while abs(np.dot(w, offsets**j)) < 1e-9:
        j += 1
    return tuple(int(o) for o in offsets), tuple(float(x) for x in w), j - k


@dataclass
class DerivEstimate:
    nu: MultiIndex
    target: str
    value: float
    step: float
    richardson_order: int
    y: np.ndarray
    n_solves: int = 0


def _check_request(nu: MultiIndex, step: float, y: np.ndarray):
    if nu.order > MAX_ORDER:
        raise ConstraintError(f"|nu| = {nu.order} exceeds {MAX_ORDER}")
    if not STEP_RANGE[0] <= step <= STEP_RANGE[1]:
        raise StencilError(f"step {step} outside {STEP_RANGE}")
    for i, k in nu.entries:
        reach = central_stencil(k)[0][-1] * step
        if i > len(y):
            raise StencilError(f"coordinate {i} not present in y (length {len(y)})")
        if abs(y[i - 1]) + reach > 0.5 + 1e-14:
            raise StencilError(f"stencil around y_{i}={y[i - 1]} with reach {reach} leaves [-1/2, 1/2]")


def _pad(y, nu: MultiIndex) -> np.ndarray:
    y = np.asarray(y, dtype=float).ravel()
    need = nu.max_coordinate
    if need > len(y):
        y = np.concatenate([y, np.zeros(need - len(y))])
    return y


class _StateCache:
    """Ground-state solves keyed by the exact stencil point, warm-started from a base state."""

    def __init__(self, spec: ProblemSpec, tol: float, base: GroundState | None = None):
        self.spec = spec
        self.tol = tol
        self.base = base
        self.states: dict[tuple, GroundState] = {}

    def get(self, y: np.ndarray) -> GroundState:
        key = tuple(np.round(y, 15))
        if key not in self.states:
            u0 = None if self.base is None else self.base.u
            gs = solve_ground(self.spec, y, tol=self.tol, u0=u0)
            if self.base is None:
                self.base = gs
            self.states[key] = gs
        return self.states[key]


def _quantity(spec: ProblemSpec, gs: GroundState, target: str):
    if target == "lambda":
        return gs.lam
    if target == "energy":
        return gs.energy
    if target in ("u_L2norm", "u_H1norm"):
        return gs.u
    if target == "u_pow_integral":
        return spec.grid.integrate(gs.u ** (spec.p + 1))
    raise ValueError(f"unknown target {target!r}")


def _stencil_combination(cache: _StateCache, y: np.ndarray, nu: MultiIndex, step: float,
                         targets: Sequence[str]) -> dict:
    coords = [i for i, _ in nu.entries]
    stencils = [central_stencil(k) for _, k in nu.entries]
    scale = step ** (-nu.order)
    acc = {t: 0.0 for t in targets}
    for combo in product(*[range(len(st[0])) for st in stencils]):
        w = 1.0
        yy = y.copy()
        for c, st, idx in zip(coords, stencils, combo):
            w *= st[1][idx]
            yy[c - 1] += st[0][idx] * step
        if w == 0.0:
            continue
        gs = cache.get(yy)
        for t in targets:
            acc[t] = acc[t] + w * _quantity(cache.spec, gs, t)
    return {t: v * scale for t, v in acc.items()}


def _scheme_order(nu: MultiIndex) -> int:
    return min(central_stencil(k)[2] for _, k in nu.entries)


def _finalize(spec: ProblemSpec, target: str, raw) -> float:
    if target == "u_L2norm":
        return spec.grid.norm(raw)
    if target == "u_H1norm":
        return h1_seminorm(spec.grid, raw)
    return float(raw)


def _fd_many(spec: ProblemSpec, y, nu: MultiIndex, targets: Sequence[str], step: float | None,
             richardson_order: int, tol: float, cache: _StateCache | None = None):
    y = _pad(y, nu)
    step = default_step(nu.order) if step is None else float(step)
    if richardson_order not in (0, 1):
        raise ValueError("richardson_order must be 0 or 1")
    _check_request(nu, step, y)
    if cache is None:
        cache = _StateCache(spec, tol)
    if nu.is_zero():
        gs = cache.get(y)
        raw = {t: _quantity(spec, gs, t) for t in targets}
    else:
        raw = _stencil_combination(cache, y, nu, step, targets)
        if richardson_order == 1:
            half = _stencil_combination(cache, y, nu, step / 2, targets)
            f = 2.0 ** _scheme_order(nu)
            raw = {t: (f * half[t] - raw[t]) / (f - 1.0) for t in targets}
    return y, step, {t: _finalize(spec, t, raw[t]) for t in targets}, len(cache.states)


def fd_mixed(spec: ProblemSpec, y, nu: MultiIndex, target: str = "lambda",
             step: float | None = None, richardson_order: int = 0,
             tol: float = FD_TOL) -> DerivEstimate:
    """Tensor-product central-difference estimate of d^nu target(y).

    Field targets (``u_L2norm``, ``u_H1norm``) difference the normalised,
    positive (hence sign-aligned) ground states and report the norm of the
    resulting field.
    """
    if target not in TARGETS:
        raise ValueError(f"target must be one of {TARGETS}")
    y, step, vals, n = _fd_many(spec, y, nu, [target], step, richardson_order, tol)
    return DerivEstimate(nu, target, vals[target], step, richardson_order, y, n)


def bound_weight(pot_norms: np.ndarray, nu: MultiIndex) -> float:
    """|nu|! prod ||b_i||^nu_i."""
    w = float(math.factorial(nu.order))
    for i, k in nu.entries:
        w *= float(pot_norms[i - 1]) ** k
    return w


@dataclass
class BoundRatioReport:
    target: str
    coords: list
    rows: list = field(default_factory=list)  # (nu, sample index, estimate, ratio)

    def ratios(self) -> dict:
        """max over samples of r(nu), keyed by nu.pack()."""
        out: dict[str, float] = {}
        for nu, _, _, r in self.rows:
            out[nu.pack()] = max(out.get(nu.pack(), 0.0), r)
        return out

    @property
    def max_ratio(self) -> float:
        return max(r for _, _, _, r in self.rows)

    def per_order(self) -> dict:
        """order -> max r(nu)^{1/|nu|} over that order (order 0 is r(0) itself)."""
        out: dict[int, float] = {}
        for nu, _, _, r in self.rows:
            k = nu.order
            val = r if k == 0 else r ** (1.0 / k)
            out[k] = max(out.get(k, 0.0), val)
        return dict(sorted(out.items()))

    @property
    def cross_order_constant(self) -> float:
        return max(v for k, v in self.per_order().items() if k > 0)

    def first_order_max(self) -> float:
        return self.per_order().get(1, 0.0)

    def single_constant_holds(self, factor: float = 10.0, orders: Iterable[int] = (1, 2)) -> bool:
        """max r^{1/|nu|} over the given orders <= factor * max r(e_i)."""
        po = self.per_order()
        ref = po.get(1, 0.0)
        return all(po.get(k, 0.0) <= factor * ref for k in orders)


def bound_scan(spec: ProblemSpec, y_samples, order_cap: int = 2, coords: Sequence[int] = (1, 2),
               target: str = "lambda", step: float | None = None, richardson_order: int = 0,
               tol: float = FD_TOL) -> BoundRatioReport:
    """All nu over ``coords`` with |nu| <= order_cap at every sample, as ratios r(nu)."""
    if order_cap > MAX_ORDER:
        raise ConstraintError(f"order_cap must be <= {MAX_ORDER}")
    coords = list(coords)
    if len(coords) > 4:
        raise ValueError("at most four coordinates per scan")
    norms = spec.pot.sup_norms
    nus = [MultiIndex.from_mapping({coords[i]: e for i, e in enumerate(dense) if e})
           for dense in (m.dense(len(coords)) for m in all_multi_indices(len(coords), order_cap))]
    nus.sort(key=lambda m: (m.order, m.sort_key()))
    rep = BoundRatioReport(target, coords)
    for k, y in enumerate(y_samples):
        cache = _StateCache(spec, tol)
        for nu in nus:
            _, _, vals, _ = _fd_many(spec, y, nu, [target], step, richardson_order, tol, cache)
            est = vals[target]
            rep.rows.append((nu, k, est, abs(est) / bound_weight(norms, nu)))
    return rep


@dataclass
class EnergyDerivCheck:
    estimate: DerivEstimate
    via_identity: float
    rel_diff: float

    @property
    def passed(self) -> bool:
        return self.rel_diff <= 1e-4


def energy_deriv_check(spec: ProblemSpec, y, nu: MultiIndex, step: float | None = None,
                       tol: float = FD_TOL) -> EnergyDerivCheck:
    """FD of the energy against FD(lambda) - eta (p-1)/(p+1) FD(int u^{p+1}).

    All three differences use the same stencil solves. The identity holds at
    every stencil node, so truncation error cancels and only solver noise
    matters; a wide default step (1e-2) keeps that noise small.
    """
    if not admissible_energy(spec.grid.d, spec.p):
        raise AdmissibilityError(f"(d, p) = ({spec.grid.d}, {spec.p}) not admissible for energies")
    if nu.order > 2:
        raise ConstraintError("energy cross-check supports |nu| <= 2")
    step = ENERGY_CHECK_STEP if step is None else step
    y, step, vals, n = _fd_many(spec, y, nu, ["energy", "lambda", "u_pow_integral"], step, 0, tol)
    p = spec.p
    other = vals["lambda"] - spec.eta * (p - 1) / (p + 1) * vals["u_pow_integral"]
    scale = max(abs(vals["energy"]), abs(other), 1e-300)
    est = DerivEstimate(nu, "energy", vals["energy"], step, 0, y, n)
    return EnergyDerivCheck(est, other, abs(vals["energy"] - other) / scale)
