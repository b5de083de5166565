"""Affine parametric potential b(x, y) = b0(x) + sum_j y_j b_j(x), y in [-1/2, 1/2]^s."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import zeta as hurwitz_zeta

from .errors import PotentialError
from .spatial import Grid

FAMILIES = ("sine", "ramp", "constant")


@dataclass(frozen=True)
class DecaySpec:
    """Algebraic decay ||b_j||_inf = c * j^(-theta)."""

    c: float
    theta: float
    kind: str = "algebraic"

    def __post_init__(self):
        if self.kind != "algebraic":
            raise ValueError(f"unsupported decay kind {self.kind!r}")
        if self.c <= 0 or self.theta <= 1:
            raise ValueError("need c > 0 and theta > 1")

    @property
    def nominal_q(self) -> float:
        """The summability exponent 1/theta (the sequence lies in l^q for every q above it)."""
        return 1.0 / self.theta

    def sup_norm(self, j: int | np.ndarray) -> float | np.ndarray:
        return self.c * np.asarray(j, dtype=float) ** (-self.theta)

    def lq_norm(self, r: float) -> float:
        if r * self.theta <= 1:
            return np.inf
        return self.c * float(hurwitz_zeta(r * self.theta, 1)) ** (1.0 / r)


def _mode_shape(family: str, j: int, d: int) -> Callable[[np.ndarray], np.ndarray]:
    if family == "sine":
        if d == 1:
            return lambda x: np.sin(j * np.pi * x[:, 0])
        return lambda x: np.sin(j * np.pi * x[:, 0]) * np.sin(j * np.pi * x[:, 1])
    if family == "ramp":
        if j % 2:
            return lambda x: x[:, 0]
        return lambda x: 1.0 - x[:, 0]
    if family == "constant":
        return lambda x: np.ones(len(x))
    raise ValueError(f"unknown mode family {family!r}; expected one of {FAMILIES}")


@dataclass
class AffinePotential:
    """b0 plus modes b_j = sup_norms[j-1] * shape_j(x), with |shape_j| <= 1.

    ``b0`` is a float or a callable on an (n, d) coordinate array. Mode shapes
    are callables with sup-norm one, so ``sup_norms`` are the exact
    ||b_j||_inf.
    """

    b0: Callable[[np.ndarray], np.ndarray] | float
    shapes: Sequence[Callable[[np.ndarray], np.ndarray]]
    sup_norms: np.ndarray
    decay: DecaySpec | None = None
    family: str = "custom"
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.sup_norms = np.asarray(self.sup_norms, dtype=float)
        if len(self.shapes) != len(self.sup_norms):
            raise ValueError("one sup-norm per mode required")
        if np.any(self.sup_norms < 0) or np.any(np.diff(self.sup_norms) > 0):
            raise ValueError("mode sup-norms must be non-negative and non-increasing")

    @classmethod
    def algebraic(cls, c: float, theta: float, s_max: int, d: int = 1,
                  family: str = "sine", margin: float = 0.1,
                  b0: float | None = None) -> AffinePotential:
        """Modes c j^-theta * shape_j; b0 = c zeta(theta)/2 + margin unless given.

        The default b0 keeps b(y) >= 0 for every y in U, including the
        infinite-dimensional tail.
        """
        decay = DecaySpec(c, theta)
        shapes = [_mode_shape(family, j, d) for j in range(1, s_max + 1)]
        if b0 is None:
            b0 = c * float(hurwitz_zeta(theta, 1)) / 2.0 + margin
        return cls(b0, shapes, decay.sup_norm(np.arange(1, s_max + 1)), decay, family)

    @property
    def s_max(self) -> int:
        return len(self.shapes)

    def b0_values(self, grid: Grid) -> np.ndarray:
        key = ("b0", grid.d, grid.m)
        if key not in self._cache:
            self._cache[key] = grid.sample(self.b0)
        return self._cache[key]

    def mode_matrix(self, grid: Grid) -> np.ndarray:
        """(n, s_max) array with column j-1 holding b_j at the interior nodes."""
        key = ("modes", grid.d, grid.m)
        if key not in self._cache:
            cols = [norm * np.asarray(shape(grid.coords), dtype=float).reshape(grid.n)
                    for shape, norm in zip(self.shapes, self.sup_norms)]
            mat = np.column_stack(cols) if cols else np.zeros((grid.n, 0))
            mat.setflags(write=False)
            self._cache[key] = mat
        return self._cache[key]

    def min_guaranteed(self, grid: Grid) -> float:
        """min over nodes of b0 - 1/2 sum_j |b_j| (plus the analytic tail when known)."""
        tail = tail_sum(self, self.s_max) if self.decay is not None else 0.0
        lower = self.b0_values(grid) - 0.5 * np.abs(self.mode_matrix(grid)).sum(axis=1) - 0.5 * tail
        return float(lower.min())


def check_param(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float).ravel()
    if np.any(np.abs(y) > 0.5 + 1e-14):
        raise ValueError("parameter outside [-1/2, 1/2]^s")
    return y


def evaluate_potential(pot: AffinePotential, y: np.ndarray, grid: Grid) -> np.ndarray:
    """b0 + sum_{j<=s} y_j b_j at the interior nodes; coordinates beyond s are zero."""
    y = check_param(y)
    s = len(y)
    if s > pot.s_max:
        raise ValueError(f"parameter has {s} entries but the potential stores {pot.s_max} modes")
    b = pot.b0_values(grid) + pot.mode_matrix(grid)[:, :s] @ y
    if np.any(b < 0):
        node = int(np.argmin(b))
        raise PotentialError(
            f"potential negative at node {node} (x={grid.coords[node]}): b={b[node]:.3e}")
    return b


def tail_sum(pot: AffinePotential, s: int) -> float:
    """sum_{j>s} ||b_j||_inf over the full (infinite) algebraic sequence."""
    if s < 0:
        raise ValueError("s must be >= 0")
    if pot.decay is None:
        return float(np.sum(pot.sup_norms[s:]))
    return pot.decay.c * float(hurwitz_zeta(pot.decay.theta, s + 1))


def tail_sum_oracle(c: float, theta: float, s: int, n_terms: int = 2000) -> float:
    """Partial sum plus Euler-Maclaurin remainder, independent of the Hurwitz zeta call."""
    k = np.arange(s + 1, s + n_terms + 1, dtype=float)
    partial = np.sum(k[::-1] ** (-theta))
    M = s + n_terms
    # sum_{j>M} j^-theta ~ int_M^inf + correction terms
    rem = M ** (1 - theta) / (theta - 1) - 0.5 * M ** (-theta) + theta / 12.0 * M ** (-theta - 1)
    return c * (partial + rem)


@dataclass
class TailCheck:
    s: int
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs


def check_tail_inequality(pot: AffinePotential, r: float, s_list: Sequence[int]) -> list[TailCheck]:
    """Tail bound sum_{j>s} beta_j <= min(r/(1-r), 1) ||beta||_{l^r} s^{1-1/r}."""
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie in (0, 1)")
    if pot.decay is None:
        raise ValueError("tail inequality needs an algebraic decay spec")
    norm_r = pot.decay.lq_norm(r)
    factor = min(r / (1.0 - r), 1.0)
    out = []
    for s in s_list:
        if s < 1:
            raise ValueError("s must be >= 1")
        out.append(TailCheck(int(s), tail_sum(pot, s), factor * norm_r * s ** (1.0 - 1.0 / r)))
    return out


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based (Philox) generator; identical (seed, stream) give identical draws.

    Distinct ``stream`` values give statistically independent sequences for
    the same seed, so each study draws from its own stream.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed) % 2**63, int(stream)])))


def sample_y(s: int, rng_seed: int, count: int, stream: int = 0) -> np.ndarray:
    """``count`` iid Uniform[-1/2, 1/2]^s vectors as a (count, s) array."""
    if s < 1:
        raise ValueError("s must be >= 1")
    if count == 0:
        return np.zeros((0, s))
    return make_rng(rng_seed, stream).random((count, s)) - 0.5
