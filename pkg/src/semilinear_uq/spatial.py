"""Finite-difference discretisation on the unit interval / unit square.

Homogeneous Dirichlet data; unknowns are the interior nodes in lexicographic
order (x1 fastest). The discrete L2 structure is mass-lumped:
<u, v> = h^d * sum(u * v).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import AssemblyError, IterationLimitError, SolverError

Coefficient = Callable[[np.ndarray], np.ndarray] | float


@dataclass(frozen=True)
class Grid:
    """Uniform grid with ``m`` interior nodes per axis on (0, 1)^d."""

    d: int
    m: int
    coords: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError("only d = 1 and d = 2 are supported")
        if self.m < 1:
            raise ValueError("need at least one interior node")
        x = np.arange(1, self.m + 1) * self.h
        if self.d == 1:
            coords = x[:, None]
        else:
            x1, x2 = np.meshgrid(x, x, indexing="xy")
            coords = np.column_stack([x1.ravel(), x2.ravel()])
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    @classmethod
    def from_h(cls, h: float, d: int = 1) -> Grid:
        m = round(1.0 / h) - 1
        if m < 1 or abs((m + 1) * h - 1.0) > 1e-12:
            raise ValueError(f"h={h} does not divide the unit interval")
        return cls(d, m)

    @property
    def h(self) -> float:
        return 1.0 / (self.m + 1)

    @property
    def n(self) -> int:
        return self.m**self.d

    @property
    def cell_volume(self) -> float:
        return self.h**self.d

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        return self.cell_volume * float(np.dot(u, v))

    def norm(self, u: np.ndarray) -> float:
        return np.sqrt(self.inner(u, u))

    def integrate(self, f: np.ndarray) -> float:
        return self.cell_volume * float(np.sum(f))

    def normalize(self, u: np.ndarray) -> np.ndarray:
        """Unit discrete-L2 norm with the sign fixed so that the integral is positive."""
        nrm = self.norm(u)
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        u = u / nrm
        if np.sum(u) < 0:
            u = -u
        return u

    def sample(self, f: Coefficient) -> np.ndarray:
        if callable(f):
            return np.asarray(f(self.coords), dtype=float).reshape(self.n)
        return np.full(self.n, float(f))


@dataclass
class EigPair:
    value: float
    vector: np.ndarray
    residual_norm: float
    iterations: int = 0


def _edge_values(a: Coefficient, points: np.ndarray) -> np.ndarray:
    if callable(a):
        vals = np.asarray(a(points), dtype=float).reshape(len(points))
    else:
        vals = np.full(len(points), float(a))
    if np.any(~np.isfinite(vals)) or np.any(vals <= 0.0):
        bad = int(np.argmin(vals))
        raise AssemblyError(f"diffusion coefficient not positive at {points[bad]} (value {vals[bad]})")
    return vals


def assemble_stiffness(grid: Grid, a: Coefficient = 1.0) -> sp.csr_matrix:
    """Five-point (d=2) / three-point (d=1) discretisation of -div(a grad).

    ``a`` is evaluated at edge midpoints (a float means a constant coefficient).
    Dirichlet rows are eliminated, so the matrix is n x n, symmetric and
    positive definite for a > 0.
    """
    m, h, d = grid.m, grid.h, grid.d
    # midpoints x_{i+1/2}, i = 0..m (includes the two boundary half-edges)
    mids = (np.arange(m + 1) + 0.5) * h

    if d == 1:
        am = _edge_values(a, mids[:, None])
        main = (am[:-1] + am[1:]) / h**2
        off = -am[1:-1] / h**2
        return sp.diags([off, main, off], [-1, 0, 1], format="csr")

    x = np.arange(1, m + 1) * h
    n = grid.n
    idx = np.arange(n).reshape(m, m)  # idx[row=x2, col=x1]
    diag = np.zeros(n)
    rows, cols, vals = [], [], []
    # x1-direction edges: between (i, j) and (i+1, j) along columns
    for axis in (0, 1):
        for jline in range(m):
            if axis == 0:
                pts = np.column_stack([mids, np.full(m + 1, x[jline])])
                line = idx[jline, :]
            else:
                pts = np.column_stack([np.full(m + 1, x[jline]), mids])
                line = idx[:, jline]
            ae = _edge_values(a, pts) / h**2
            diag[line] += ae[:-1] + ae[1:]
            rows.extend(line[:-1])
            cols.extend(line[1:])
            vals.extend(-ae[1:-1])
    rows = np.asarray(rows)
    cols = np.asarray(cols)
    vals = np.asarray(vals)
    A = sp.coo_matrix(
        (np.concatenate([vals, vals, diag]),
         (np.concatenate([rows, cols, np.arange(n)]), np.concatenate([cols, rows, np.arange(n)]))),
        shape=(n, n),
    )
    return A.tocsr()


def _diagonal_positions(opr: sp.csr_matrix) -> np.ndarray | None:
    """Indices into ``opr.data`` of the stored diagonal, or None if some are missing."""
    n = opr.shape[0]
    rows = np.repeat(np.arange(n), np.diff(opr.indptr))
    pos = np.flatnonzero(rows == opr.indices)
    return pos if len(pos) == n else None


def add_diagonal(opr: sp.spmatrix, w: np.ndarray | float) -> sp.csr_matrix:
    n = opr.shape[0]
    w = np.broadcast_to(np.asarray(w, dtype=float), (n,)) if np.ndim(w) == 0 else np.asarray(w, dtype=float)
    if w.shape != (n,):
        raise ValueError(f"diagonal of length {w.shape} does not match operator size {n}")
    out = sp.csr_matrix(opr, copy=True)
    out.sum_duplicates()
    pos = _diagonal_positions(out)
    if pos is None:
        return (out + sp.diags(w, 0, shape=opr.shape)).tocsr()
    out.data[pos] += w
    return out


def rayleigh_quotient(opr: sp.spmatrix, v: np.ndarray) -> float:
    return float(v @ (opr @ v)) / float(v @ v)


def _default_margin(opr: sp.spmatrix) -> float:
    # distance kept between the shift and the Rayleigh quotient of the start
    # vector; avoids an exactly singular factorisation when v0 is an eigenvector
    return 1e-6 * max(1.0, float(np.max(np.abs(opr.diagonal()))))


def smallest_eigpair(opr: sp.spmatrix, grid: Grid, tol: float = 1e-10,
                     v0: np.ndarray | None = None, max_iters: int = 500) -> EigPair:
    """Ground eigenpair of an SPD operator by (shifted) inverse iteration.

    Without ``v0`` the iteration is unshifted. With a start vector the shift is
    placed just below its Rayleigh quotient, which converges in a few steps
    when v0 is close; if that ever lands on a sign-changing eigenvector the
    unshifted iteration is rerun.
    """
    n = opr.shape[0]
    if v0 is not None and n > 1:
        sigma = rayleigh_quotient(opr, v0) - _default_margin(opr)
        try:
            pair = _inverse_iteration(opr, grid, tol, v0, sigma, max_iters)
        except IterationLimitError:
            pair = None
        if pair is not None and _is_positive(pair.vector):
            return pair
        if pair is None:
            # a far-off start vector put the shift inside the spectrum
            return _krylov_ground(opr, grid, tol, max_iters)
    start = np.ones(n) if v0 is None else v0
    try:
        return _inverse_iteration(opr, grid, tol, start, 0.0, max_iters)
    except IterationLimitError:
        # clustered bottom of the spectrum: power-type iteration stalls
        return _krylov_ground(opr, grid, tol, max_iters)


def _is_positive(v: np.ndarray) -> bool:
    return bool(np.all(v > 0) or np.min(v) >= -1e-12 * np.max(v))


def _krylov_ground(opr, grid, tol, max_iters) -> EigPair:
    """Shift-invert Lanczos about zero, for operators with a near-degenerate ground pair."""
    n = opr.shape[0]
    k = min(2, n - 1)
    try:
        vals, vecs = spla.eigsh(sp.csc_matrix(opr), k=k, sigma=0.0, which="LM",
                                tol=0.01 * tol, maxiter=max_iters * n)
    except spla.ArpackNoConvergence as exc:
        raise IterationLimitError(f"Lanczos fallback did not converge: {exc}", best=None) from exc
    j = int(np.argmin(vals))
    v = grid.normalize(vecs[:, j])
    Av = opr @ v
    lam = float(v @ Av) / float(v @ v)
    res = grid.norm(Av - lam * v)
    if res > tol * abs(lam):
        raise IterationLimitError(f"Lanczos fallback residual {res:.3e} above tol={tol}",
                                  best=EigPair(lam, v, res, max_iters))
    return EigPair(lam, v, res, 0)


def _inverse_iteration(opr, grid, tol, v0, sigma, max_iters) -> EigPair:
    n = opr.shape[0]
    shifted = add_diagonal(opr, -sigma) if sigma else sp.csr_matrix(opr)
    try:
        # the operator is symmetric, so the CSR arrays read as CSC give the same matrix
        lu = spla.splu(shifted.T)
    except RuntimeError as exc:  # exactly singular shift
        raise SolverError(f"factorisation failed: {exc}") from exc
    v = grid.normalize(np.asarray(v0, dtype=float))
    lam = rayleigh_quotient(opr, v)
    res = np.inf
    polished = False
    for it in range(1, max_iters + 1):
        w = lu.solve(v)
        v = grid.normalize(w)
        Av = opr @ v
        lam = float(v @ Av) / float(v @ v)
        res = grid.norm(Av - lam * v)
        if res <= tol * abs(lam):
            # one extra step pushes the iterate to rounding level
            if polished or res <= 1e-3 * tol * abs(lam):
                return EigPair(lam, v, res, it)
            polished = True
    raise IterationLimitError(
        f"inverse iteration did not reach tol={tol} in {max_iters} steps (residual {res:.3e})",
        best=EigPair(lam, v, res, max_iters),
    )


def second_eigvalue(opr: sp.spmatrix, grid: Grid, ground: EigPair, tol: float = 1e-10,
                    max_iters: int = 5000) -> float:
    """Smallest eigenvalue on the discrete-L2 complement of ``ground.vector``."""
    n = opr.shape[0]
    if n < 2:
        raise ValueError("operator has no second eigenvalue")
    lu = spla.splu(opr.tocsc())
    g = ground.vector / grid.norm(ground.vector)

    def project(v):
        return v - grid.inner(g, v) * g

    rng = np.random.default_rng(12345)
    v = grid.normalize(project(rng.standard_normal(n) + np.linspace(-1.0, 1.0, n)))
    lam = np.inf
    res = np.inf
    for _ in range(max_iters):
        v = project(lu.solve(v))
        v = v / grid.norm(v)
        Av = opr @ v
        lam = float(v @ Av) / float(v @ v)
        res = grid.norm(project(Av) - lam * v)
        if res <= tol * abs(lam):
            return lam
    raise IterationLimitError(f"deflated inverse iteration stalled (residual {res:.3e})", best=lam)


def h1_seminorm(grid: Grid, v: np.ndarray, stiffness: sp.spmatrix | None = None) -> float:
    """sqrt(<A v, v>) with A the a = 1 stiffness matrix."""
    A = assemble_stiffness(grid, 1.0) if stiffness is None else stiffness
    return float(np.sqrt(max(grid.inner(A @ v, v), 0.0)))
