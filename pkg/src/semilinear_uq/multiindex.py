"""Exact multi-index algebra and the combinatorics of derivatives of u**p.

Everything here works in exact rational arithmetic (``fractions.Fraction``);
floating point never enters.
"""
from __future__ import annotations

import functools
import itertools
import math
import operator
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .errors import ConstraintError

MAX_COORDINATE = 2**32

NONZERO_STRICT = "nonzero_strict"
UNCONSTRAINED = "unconstrained"


@dataclass(frozen=True)
class MultiIndex:
    """Finitely supported multi-index, stored sparsely.

    ``entries`` holds ``(coordinate, exponent)`` pairs with 1-based
    coordinates, strictly increasing, and no zero exponents.
    """

    entries: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        prev = 0
        for coord, exp in self.entries:
            if not (1 <= coord <= MAX_COORDINATE):
                raise ValueError(f"coordinate {coord} out of range")
            if coord <= prev:
                raise ValueError("coordinates must be strictly increasing")
            if exp <= 0:
                raise ValueError("stored exponents must be positive")
            prev = coord

    @classmethod
    def from_dense(cls, values: Iterable[int]) -> MultiIndex:
        pairs = []
        for i, v in enumerate(values, start=1):
            if v < 0:
                raise ValueError("negative exponent")
            if v:
                pairs.append((i, int(v)))
        return cls(tuple(pairs))

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, int]) -> MultiIndex:
        return cls(tuple(sorted((int(k), int(v)) for k, v in mapping.items() if v)))

    @classmethod
    def unit(cls, i: int) -> MultiIndex:
        return cls(((i, 1),))

    @property
    def order(self) -> int:
        return sum(e for _, e in self.entries)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(c for c, _ in self.entries)

    @property
    def max_coordinate(self) -> int:
        return self.entries[-1][0] if self.entries else 0

    def is_zero(self) -> bool:
        return not self.entries

    def __getitem__(self, coord: int) -> int:
        for c, e in self.entries:
            if c == coord:
                return e
        return 0

    def as_dict(self) -> dict[int, int]:
        return dict(self.entries)

    def dense(self, length: int | None = None) -> tuple[int, ...]:
        length = self.max_coordinate if length is None else length
        if length < self.max_coordinate:
            raise ValueError("length shorter than support")
        out = [0] * length
        for c, e in self.entries:
            out[c - 1] = e
        return tuple(out)

    def factorial(self) -> int:
        return math.prod(math.factorial(e) for _, e in self.entries)

    def __add__(self, other: MultiIndex) -> MultiIndex:
        merged = self.as_dict()
        for c, e in other.entries:
            merged[c] = merged.get(c, 0) + e
        return MultiIndex(tuple(sorted(merged.items())))

    def __sub__(self, other: MultiIndex) -> MultiIndex:
        if not other <= self:
            raise ValueError("difference would have negative entries")
        merged = self.as_dict()
        for c, e in other.entries:
            merged[c] -= e
        return MultiIndex.from_mapping(merged)

    def leq(self, other: MultiIndex) -> bool:
        """Componentwise partial order."""
        return all(e <= other[c] for c, e in self.entries)

    # comparison operators are the componentwise partial order; sort with sort_key
    def __le__(self, other):  # type: ignore[override]
        return self.leq(other)

    def __lt__(self, other):  # type: ignore[override]
        return self.leq(other) and self != other

    def __ge__(self, other):  # type: ignore[override]
        return other.leq(self)

    def __gt__(self, other):  # type: ignore[override]
        return other.leq(self) and self != other

    def sort_key(self) -> tuple:
        return self.entries

    def pack(self) -> str:
        """Compact string form, e.g. ``1:1;2:2`` (``0`` for the zero index)."""
        if not self.entries:
            return "0"
        return ";".join(f"{c}:{e}" for c, e in self.entries)

    @classmethod
    def unpack(cls, text: str) -> MultiIndex:
        if text.strip() == "0":
            return cls()
        pairs = [tuple(int(t) for t in item.split(":")) for item in text.split(";")]
        return cls(tuple(sorted(pairs)))

    def __repr__(self) -> str:
        return f"MultiIndex({self.pack()})"


ZERO = MultiIndex()


@dataclass(frozen=True)
class PartitionSequence:
    parts: tuple[MultiIndex, ...]
    target: MultiIndex

    def __post_init__(self):
        total = ZERO
        for m in self.parts:
            total = total + m
        if total != self.target:
            raise ConstraintError(f"parts sum to {total!r}, expected {self.target!r}")

    def __len__(self) -> int:
        return len(self.parts)

    def sorted_parts(self) -> tuple[MultiIndex, ...]:
        return tuple(sorted(self.parts, key=MultiIndex.sort_key))


def all_multi_indices(n_vars: int, max_order: int, min_order: int = 0) -> list[MultiIndex]:
    """Every multi-index over coordinates 1..n_vars with order in [min_order, max_order]."""
    out = []
    for exps in itertools.product(range(max_order + 1), repeat=n_vars):
        if min_order <= sum(exps) <= max_order:
            out.append(MultiIndex.from_dense(exps))
    out.sort(key=lambda m: (m.order, m.dense(n_vars)))
    return out


def multinomial(target: MultiIndex, parts: PartitionSequence | Iterable[MultiIndex]) -> Fraction:
    """prod_j target_j! / (m_1j! ... m_pj!)."""
    if isinstance(parts, PartitionSequence):
        if parts.target != target:
            raise ConstraintError("partition target mismatch")
        parts = parts.parts
    else:
        parts = PartitionSequence(tuple(parts), target).parts
    num = target.factorial()
    den = math.prod(m.factorial() for m in parts)
    return Fraction(num, den)


def falling_half(n: int) -> Fraction:
    """[1/2]_n = |(1/2)(1/2 - 1)...(1/2 - n + 1)|."""
    if n < 0:
        raise ValueError("n must be non-negative")
    out = Fraction(1)
    half = Fraction(1, 2)
    for i in range(n):
        out *= abs(half - i)
    return out


def _sub_indices(remaining: MultiIndex) -> Iterator[MultiIndex]:
    coords = remaining.support
    ranges = [range(remaining[c] + 1) for c in coords]
    for exps in itertools.product(*ranges):
        yield MultiIndex(tuple((c, e) for c, e in zip(coords, exps) if e))


def enumerate_partitions(
    target: MultiIndex, n: int, constraint: str = NONZERO_STRICT
) -> Iterator[PartitionSequence]:
    """Stream every ordered n-tuple of multi-indices summing to ``target``.

    With ``nonzero_strict`` each part must be nonzero and strictly below
    ``target``. Parts are produced lexicographically; the recursion prunes
    branches whose remaining order cannot be split into the remaining parts.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if constraint not in (NONZERO_STRICT, UNCONSTRAINED):
        raise ValueError(f"unknown constraint {constraint!r}")
    strict = constraint == NONZERO_STRICT
    if strict and n > target.order:
        return

    def rec(remaining: MultiIndex, k: int, acc: tuple[MultiIndex, ...]):
        if k == 1:
            if strict and (remaining.is_zero() or remaining == target):
                return
            yield acc + (remaining,)
            return
        rem_order = remaining.order
        for m in _sub_indices(remaining):
            if strict:
                if m.is_zero() or m == target:
                    continue
                # each of the k-1 later parts needs order >= 1
                if rem_order - m.order < k - 1:
                    continue
            yield from rec(remaining - m, k - 1, acc + (m,))

    for parts in rec(target, n, ()):
        yield PartitionSequence(parts, target)


@dataclass(frozen=True)
class GammaTerm:
    """coefficient * u**u_power * prod(d^m u for m in parts)."""

    coefficient: Fraction
    u_power: int
    parts: tuple[MultiIndex, ...]

    def format(self) -> str:
        parts = " ".join(m.pack() for m in self.parts)
        return f"{self.coefficient} {self.u_power} {parts}"


def gamma_expansion(p: int, nu: MultiIndex, collect: bool = True) -> list[GammaTerm]:
    """Expansion of d^nu(u^p) as p u^{p-1} d^nu u plus the lower-order part.

    The lower-order part runs over n = 0..p-2 and over ordered partitions of
    ``nu`` into p-n nonzero parts strictly below ``nu``, each weighted by
    binom(p, n) times the multinomial coefficient. With ``collect`` the
    ordered terms are merged by their sorted derivative parts.
    """
    if p < 2:
        raise ValueError("p must be >= 2")
    if nu.is_zero():
        raise ConstraintError("expansion is only defined for nonzero nu")
    terms = [GammaTerm(Fraction(p), p - 1, (nu,))]
    for n in range(p - 1):
        binom = math.comb(p, n)
        for part in enumerate_partitions(nu, p - n, NONZERO_STRICT):
            coef = binom * multinomial(nu, part)
            parts = part.sorted_parts() if collect else part.parts
            terms.append(GammaTerm(coef, n, parts))
    if not collect:
        return terms
    acc: dict[tuple[int, tuple[MultiIndex, ...]], Fraction] = defaultdict(Fraction)
    for t in terms:
        acc[(t.u_power, t.parts)] += t.coefficient
    out = [GammaTerm(c, k, parts) for (k, parts), c in acc.items() if c != 0]
    out.sort(key=lambda t: (-t.u_power, [m.sort_key() for m in t.parts]))
    return out


@functools.lru_cache(maxsize=4096)
def _gamma_cached(p: int, nu: MultiIndex) -> tuple[GammaTerm, ...]:
    return tuple(gamma_expansion(p, nu))


def format_terms(terms: Iterable[GammaTerm]) -> str:
    """Plain-text fixture form: one ``coefficient u_power parts...`` line per term."""
    return "\n".join(t.format() for t in terms) + "\n"


def parse_terms(text: str) -> list[GammaTerm]:
    out = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        coef, power, *parts = line.split()
        out.append(GammaTerm(Fraction(coef), int(power), tuple(MultiIndex.unpack(m) for m in parts)))
    return out


class SymbolicPoly:
    """Exact polynomial in y_1..y_k with rational coefficients.

    Monomials are keyed by ``MultiIndex`` (coordinate = variable index) at the
    public surface. Internally keys are dense exponent tuples of a common
    length and coefficients are integer numerators over one shared positive
    denominator kept in lowest terms; this avoids per-coefficient ``Fraction``
    normalisation in products.
    """

    __slots__ = ("_num", "_den", "_nv")

    def __init__(self, terms: Mapping[MultiIndex, Fraction | int] | None = None):
        num: dict[tuple, int] = {}
        den = 1
        nv = 0
        if terms:
            fracs = {m: Fraction(c) for m, c in terms.items()}
            nv = max(m.max_coordinate for m in fracs)
            den = math.lcm(*(c.denominator for c in fracs.values()))
            for m, c in fracs.items():
                key = m.dense(nv)
                num[key] = num.get(key, 0) + c.numerator * (den // c.denominator)
        self._set(num, den, nv)

    def _set(self, num: dict, den: int, nv: int) -> None:
        num = {k: v for k, v in num.items() if v}
        if not num:
            self._num, self._den, self._nv = {}, 1, 0
            return
        g = math.gcd(den, *num.values())
        if g > 1:
            num = {k: v // g for k, v in num.items()}
            den //= g
        self._num, self._den, self._nv = num, den, nv

    @classmethod
    def _raw(cls, num: dict, den: int, nv: int) -> SymbolicPoly:
        out = cls.__new__(cls)
        out._set(num, den, nv)
        return out

    def _padded(self, nv: int) -> dict:
        if nv == self._nv:
            return self._num
        pad = (0,) * (nv - self._nv)
        return {k + pad: v for k, v in self._num.items()}

    @property
    def terms(self) -> dict[MultiIndex, Fraction]:
        return {MultiIndex.from_dense(k): Fraction(v, self._den) for k, v in self._num.items()}

    @classmethod
    def constant(cls, c) -> SymbolicPoly:
        return cls({ZERO: c})

    @classmethod
    def variable(cls, i: int) -> SymbolicPoly:
        return cls({MultiIndex.unit(i): 1})

    @classmethod
    def random(cls, rng, n_vars: int = 3, max_degree: int = 3, density: float = 0.7,
               max_num: int = 9, max_den: int = 7) -> SymbolicPoly:
        """Random polynomial of total degree <= max_degree with small rational coefficients.

        ``rng`` is a ``random.Random`` instance.
        """
        terms = {}
        for mono in all_multi_indices(n_vars, max_degree):
            if mono.is_zero() or rng.random() < density:
                num = rng.randint(-max_num, max_num)
                if num:
                    terms[mono] = Fraction(num, rng.randint(1, max_den))
        if not terms:
            terms[ZERO] = Fraction(1)
        return cls(terms)

    def is_zero(self) -> bool:
        return not self._num

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymbolicPoly):
            other = SymbolicPoly.constant(other)
        nv = max(self._nv, other._nv)
        return self._den == other._den and self._padded(nv) == other._padded(nv)

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other) -> SymbolicPoly:
        if not isinstance(other, SymbolicPoly):
            other = SymbolicPoly.constant(other)
        nv = max(self._nv, other._nv)
        den = math.lcm(self._den, other._den)
        fa, fb = den // self._den, den // other._den
        out = {k: v * fa for k, v in self._padded(nv).items()}
        for k, v in other._padded(nv).items():
            out[k] = out.get(k, 0) + v * fb
        return SymbolicPoly._raw(out, den, nv)

    __radd__ = __add__

    def __neg__(self) -> SymbolicPoly:
        return SymbolicPoly._raw({k: -v for k, v in self._num.items()}, self._den, self._nv)

    def __sub__(self, other) -> SymbolicPoly:
        if not isinstance(other, SymbolicPoly):
            other = SymbolicPoly.constant(other)
        return self + (-other)

    def __mul__(self, other) -> SymbolicPoly:
        if not isinstance(other, SymbolicPoly):
            c = Fraction(other)
            return SymbolicPoly._raw({k: v * c.numerator for k, v in self._num.items()},
                                     self._den * c.denominator, self._nv)
        nv = max(self._nv, other._nv)
        a, b = self._padded(nv), other._padded(nv)
        out: dict[tuple, int] = {}
        get = out.get
        add = operator.add
        for k1, v1 in a.items():
            for k2, v2 in b.items():
                key = tuple(map(add, k1, k2))
                out[key] = get(key, 0) + v1 * v2
        return SymbolicPoly._raw(out, self._den * other._den, nv)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> SymbolicPoly:
        if k < 0:
            raise ValueError("negative power")
        out = SymbolicPoly.constant(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def diff(self, var: int, times: int = 1) -> SymbolicPoly:
        if var > self._nv:
            return SymbolicPoly()
        i = var - 1
        out = {}
        for key, c in self._num.items():
            e = key[i]
            if e < times:
                continue
            new_key = key[:i] + (e - times,) + key[i + 1:]
            out[new_key] = out.get(new_key, 0) + c * math.perm(e, times)
        return SymbolicPoly._raw(out, self._den, self._nv)

    def derivative(self, nu: MultiIndex) -> SymbolicPoly:
        out = self
        for var, times in nu.entries:
            out = out.diff(var, times)
            if out.is_zero():
                break
        return out

    def degree(self, var: int | None = None) -> int:
        if not self._num:
            return -1
        if var is None:
            return max(sum(k) for k in self._num)
        if var > self._nv:
            return 0
        return max(k[var - 1] for k in self._num)

    def evaluate(self, point: Mapping[int, Fraction] | Iterable) -> Fraction:
        if not isinstance(point, Mapping):
            point = {i: Fraction(v) for i, v in enumerate(point, start=1)}
        total = Fraction(0)
        for key, c in self._num.items():
            term = Fraction(c)
            for var, e in enumerate(key, start=1):
                if e:
                    term *= Fraction(point[var]) ** e
            total += term
        return total / self._den

    def __repr__(self) -> str:
        if not self._num:
            return "SymbolicPoly(0)"
        items = sorted(self.terms.items(), key=lambda kv: kv[0].sort_key())
        return "SymbolicPoly(" + " + ".join(f"{c}*[{m.pack()}]" for m, c in items) + ")"


def evaluate_gamma_expansion(terms: Iterable[GammaTerm], u: SymbolicPoly,
                             _cache: dict | None = None) -> SymbolicPoly:
    """Substitute a concrete polynomial u (and its exact derivatives) into the terms."""
    derivs = {} if _cache is None else _cache.setdefault("d", {})
    powers = {} if _cache is None else _cache.setdefault("p", {})

    def d(m):
        if m not in derivs:
            derivs[m] = u.derivative(m)
        return derivs[m]

    def pw(k):
        if k not in powers:
            powers[k] = u ** k
        return powers[k]

    products = {} if _cache is None else _cache.setdefault("t", {})
    total = SymbolicPoly()
    for t in terms:
        key = (t.u_power, t.parts)
        if key not in products:
            prod = d(t.parts[0])
            for m in t.parts[1:]:
                prod = prod * d(m)
            products[key] = prod * pw(t.u_power) if t.u_power else prod
        total = total + products[key] * t.coefficient
    return total


def verify_gamma_against_oracle(u: SymbolicPoly, p: int, nu: MultiIndex,
                                _cache: dict | None = None) -> bool:
    """Compare d^nu(u^p), computed by repeated exact differentiation, with the expansion."""
    powers = {} if _cache is None else _cache.setdefault("p", {})
    if p not in powers:
        powers[p] = u ** p
    lhs = powers[p].derivative(nu)
    rhs = evaluate_gamma_expansion(_gamma_cached(p, nu), u, _cache)
    return lhs == rhs


def ggcombi_lhs(p: int, nu: MultiIndex) -> Fraction:
    """Sum over nonzero-strict p-partitions of multinomial * prod [1/2]_{|m_j|}."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if nu.is_zero():
        raise ConstraintError("nu must be nonzero")
    total = Fraction(0)
    for part in enumerate_partitions(nu, p, NONZERO_STRICT):
        w = multinomial(nu, part)
        for m in part.parts:
            w *= falling_half(m.order)
        total += w
    return total


def ggcombi_rhs(p: int, nu: MultiIndex) -> Fraction:
    return 2 ** (p - 1) * falling_half(nu.order)


def check_falling_inequalities(n_max: int) -> bool:
    """[1/2]_n <= n! <= 2^{n+1}[1/2]_n for 0<=n<=n_max, and the binomial
    convolution bound sum_{i=1}^{n-1} C(n,i)[1/2]_i[1/2]_{n-i} <= 2[1/2]_n for 2<=n<=n_max."""
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    fh = [falling_half(n) for n in range(n_max + 1)]
    for n in range(n_max + 1):
        f = math.factorial(n)
        if not (fh[n] <= f <= 2 ** (n + 1) * fh[n]):
            return False
    for n in range(2, n_max + 1):
        conv = sum(math.comb(n, i) * fh[i] * fh[n - i] for i in range(1, n))
        if conv > 2 * fh[n]:
            return False
    return True


def order_weighted_multinomial_sum(nu: MultiIndex, orders: tuple[int, ...]) -> Fraction:
    """Sum of multinomial(nu; m) over ordered p-partitions with |m_j| = orders[j] for j < p.

    ``orders`` holds k_1..k_{p-1}; the last part takes the remaining order.
    """
    p = len(orders) + 1
    k_last = nu.order - sum(orders)
    if k_last < 1 or any(k < 1 for k in orders):
        return Fraction(0)
    total = Fraction(0)
    for part in enumerate_partitions(nu, p, NONZERO_STRICT):
        if all(m.order == k for m, k in zip(part.parts, orders)):
            total += multinomial(nu, part)
    return total


def scalar_multinomial(n: int, ks: Iterable[int]) -> int:
    ks = list(ks)
    if sum(ks) != n or any(k < 0 for k in ks):
        raise ConstraintError("orders must be non-negative and sum to n")
    return math.factorial(n) // math.prod(math.factorial(k) for k in ks)
