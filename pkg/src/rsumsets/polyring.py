"""Exact sparse multivariate polynomials over ZZ, QQ and prime fields.

A polynomial is a map from exponent tuples to nonzero coefficients.  The
coefficient domain is described by a small ring object (``ZZ``, ``QQ`` or
``GF(p)``) which knows how to normalize raw Python numbers into canonical
values: ``int`` for the integers, ``Fraction`` for the rationals and a residue
in ``[0, p)`` for a prime field.

Products can be truncated to an exponent cap.  Discarding a term whose
exponent exceeds the cap in some variable never changes a kept coefficient,
because multiplying by further polynomials can only raise exponents.  This is
what makes coefficient extraction at a fixed target monomial cheap.
"""

from __future__ import annotations

import functools
import json
import math
import operator
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np
from sympy import isprime

__all__ = [
    "ArityError",
    "RingMismatchError",
    "Ring",
    "Integers",
    "Rationals",
    "PrimeField",
    "ZZ",
    "QQ",
    "GF",
    "SparsePoly",
    "factorial",
    "multinomial",
    "poly_add",
    "poly_mul",
    "truncated_mul",
    "poly_pow",
    "coeff_of",
    "extract_with_power",
    "vandermonde_power",
    "power_sum_poly",
    "reduce_mod_p",
    "evaluate",
    "evaluate_many",
]


class ArityError(ValueError):
    pass


class RingMismatchError(ValueError):
    pass


# --------------------------------------------------------------------------
# coefficient rings
# --------------------------------------------------------------------------

class Ring:
    """Base class for coefficient domains."""

    zero = 0
    one = 1

    def convert(self, value):
        raise NotImplementedError

    def is_zero(self, value) -> bool:
        return value == 0

    def format(self, value) -> str:
        return str(value)

    def parse(self, text: str):
        return self.convert(Fraction(text))

    @property
    def tag(self) -> str:
        raise NotImplementedError


class Integers(Ring):
    def convert(self, value):
        if isinstance(value, Fraction):
            if value.denominator != 1:
                raise ValueError(f"{value} is not an integer")
            return value.numerator
        if isinstance(value, bool) or not isinstance(value, int):
            raise TypeError(f"cannot convert {value!r} to an integer")
        return value

    @property
    def tag(self) -> str:
        return "ZZ"

    def __eq__(self, other):
        return isinstance(other, Integers)

    def __hash__(self):
        return hash("ZZ")

    def __repr__(self):
        return "ZZ"


class Rationals(Ring):
    def convert(self, value):
        if isinstance(value, bool):
            raise TypeError("bool is not a rational")
        return Fraction(value)

    def format(self, value) -> str:
        # Fraction.__str__ already gives "n" or "n/d" in lowest terms
        return str(value)

    @property
    def tag(self) -> str:
        return "QQ"

    def __eq__(self, other):
        return isinstance(other, Rationals)

    def __hash__(self):
        return hash("QQ")

    def __repr__(self):
        return "QQ"


class PrimeField(Ring):
    """The field of residues modulo a prime ``p``."""

    def __init__(self, p: int):
        if isinstance(p, bool) or not isinstance(p, int) or not isprime(p):
            raise ValueError(f"modulus {p!r} is not prime")
        self.p = p

    def convert(self, value):
        if isinstance(value, Fraction):
            if value.denominator % self.p == 0:
                raise ZeroDivisionError(f"denominator of {value} vanishes mod {self.p}")
            return value.numerator * pow(value.denominator, -1, self.p) % self.p
        if isinstance(value, bool) or not isinstance(value, int):
            raise TypeError(f"cannot convert {value!r} into GF({self.p})")
        return value % self.p

    @property
    def tag(self) -> str:
        return f"GF({self.p})"

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("GF", self.p))

    def __repr__(self):
        return f"GF({self.p})"


ZZ = Integers()
QQ = Rationals()


@functools.lru_cache(maxsize=None)
def GF(p: int) -> PrimeField:
    return PrimeField(p)


def ring_from_tag(tag: str) -> Ring:
    tag = tag.strip()
    if tag == "ZZ":
        return ZZ
    if tag == "QQ":
        return QQ
    if tag.startswith("GF(") and tag.endswith(")"):
        return GF(int(tag[3:-1]))
    raise ValueError(f"unknown ring tag {tag!r}")


# --------------------------------------------------------------------------
# factorials
# --------------------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def factorial(n: int) -> int:
    # lru_cache is thread-safe and values are immutable ints
    if n < 0:
        raise ValueError("factorial of a negative number")
    return math.factorial(n)


def multinomial(parts: Sequence[int]) -> int:
    """(sum parts)! / prod(part!) as an exact integer."""
    out = factorial(sum(parts))
    for k in parts:
        out //= factorial(k)
    return out


# --------------------------------------------------------------------------
# sparse polynomials
# --------------------------------------------------------------------------

def _grlex_key(exps):
    return (-sum(exps), tuple(-e for e in exps))


def _within(exps, cap) -> bool:
    for e, c in zip(exps, cap):
        if e > c:
            return False
    return True


class SparsePoly:
    """Immutable sparse polynomial in ``arity`` variables ``x1..xn``.

    ``terms`` maps exponent tuples to coefficients.  Raw Python numbers are
    normalized into ``ring`` and zero coefficients are dropped.
    """

    __slots__ = ("arity", "ring", "_terms")

    def __init__(self, arity: int, terms: Mapping | Iterable = (), ring: Ring = ZZ):
        if arity < 1:
            raise ArityError("arity must be positive")
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean = {}
        for exps, c in items:
            exps = tuple(int(e) for e in exps)
            if len(exps) != arity:
                raise ArityError(f"monomial {exps} does not have arity {arity}")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            clean[exps] = clean.get(exps, 0) + c
        self.arity = arity
        self.ring = ring
        self._terms = _normalized(clean, ring)

    @classmethod
    def _from_clean(cls, arity: int, terms: dict, ring: Ring) -> "SparsePoly":
        # terms already normalized; skips validation on hot paths
        obj = object.__new__(cls)
        obj.arity = arity
        obj.ring = ring
        obj._terms = terms
        return obj

    # constructors -------------------------------------------------------

    @classmethod
    def zero(cls, arity: int, ring: Ring = ZZ) -> "SparsePoly":
        return cls._from_clean(arity, {}, ring)

    @classmethod
    def constant(cls, arity: int, c=1, ring: Ring = ZZ) -> "SparsePoly":
        return cls(arity, {(0,) * arity: c}, ring)

    @classmethod
    def monomial(cls, exps: Sequence[int], c=1, ring: Ring = ZZ) -> "SparsePoly":
        return cls(len(exps), {tuple(exps): c}, ring)

    @classmethod
    def variable(cls, arity: int, i: int, ring: Ring = ZZ) -> "SparsePoly":
        """The variable x_i, with ``i`` counted from 1."""
        if not 1 <= i <= arity:
            raise ArityError(f"x{i} does not exist in arity {arity}")
        exps = [0] * arity
        exps[i - 1] = 1
        return cls._from_clean(arity, {tuple(exps): ring.one}, ring)

    # basic protocol -------------------------------------------------------

    @property
    def terms(self) -> Mapping:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self._terms), default=-1)

    def __eq__(self, other):
        if not isinstance(other, SparsePoly):
            return NotImplemented
        return (self.arity == other.arity and self.ring == other.ring
                and self._terms == other._terms)

    def __hash__(self):
        return hash((self.arity, self.ring, frozenset(self._terms.items())))

    def __repr__(self):
        return f"SparsePoly({self.arity}, {self.to_text()!r}, ring={self.ring!r})"

    def __str__(self):
        return self.to_text()

    def __add__(self, other):
        return poly_add(self, self._coerce(other))

    __radd__ = __add__

    def __neg__(self):
        ring = self.ring
        return SparsePoly._from_clean(
            self.arity, {e: ring.convert(-c) for e, c in self._terms.items()}, ring)

    def __sub__(self, other):
        return poly_add(self, -self._coerce(other))

    def __rsub__(self, other):
        return poly_add(self._coerce(other), -self)

    def __mul__(self, other):
        return poly_mul(self, self._coerce(other))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        return poly_pow(self, e)

    def _coerce(self, other) -> "SparsePoly":
        if isinstance(other, SparsePoly):
            return other
        return SparsePoly.constant(self.arity, other, self.ring)

    def permute(self, perm: Sequence[int]) -> "SparsePoly":
        """Substitute x_i -> x_{perm[i]} (0-based positions)."""
        out = {}
        for exps, c in self._terms.items():
            new = [0] * self.arity
            for i, e in enumerate(exps):
                new[perm[i]] = e
            out[tuple(new)] = c
        return SparsePoly._from_clean(self.arity, out, self.ring)

    def swap(self, i: int, j: int) -> "SparsePoly":
        perm = list(range(self.arity))
        perm[i], perm[j] = perm[j], perm[i]
        return self.permute(perm)

    def is_symmetric(self) -> bool:
        # adjacent transpositions generate S_n
        return all(self.swap(i, i + 1) == self for i in range(self.arity - 1))

    def change_ring(self, ring: Ring) -> "SparsePoly":
        return SparsePoly(self.arity, self._terms, ring)

    # serialization -------------------------------------------------------

    def sorted_terms(self):
        """Terms in graded-lex order, highest first."""
        return sorted(self._terms.items(), key=lambda t: _grlex_key(t[0]))

    def to_text(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for exps, c in self.sorted_terms():
            mono = "*".join(
                f"x{i + 1}" if e == 1 else f"x{i + 1}^{e}"
                for i, e in enumerate(exps) if e)
            coeff = self.ring.format(c)
            parts.append(f"{coeff}*{mono}" if mono else coeff)
        return " + ".join(parts)

    def to_json(self) -> dict:
        return {
            "arity": self.arity,
            "ring": self.ring.tag,
            "terms": [[list(e), self.ring.format(c)] for e, c in self.sorted_terms()],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))

    @classmethod
    def from_json(cls, data) -> "SparsePoly":
        if isinstance(data, str):
            data = json.loads(data)
        ring = ring_from_tag(data["ring"])
        return cls(int(data["arity"]),
                   [(tuple(e), ring.parse(c)) for e, c in data["terms"]], ring)


def _normalized(raw: dict, ring: Ring) -> dict:
    out = {}
    convert = ring.convert
    for e, c in raw.items():
        c = convert(c)
        if c != 0:
            out[e] = c
    return out


def _check_compatible(a: SparsePoly, b: SparsePoly) -> None:
    if a.arity != b.arity:
        raise ArityError(f"arity mismatch: {a.arity} vs {b.arity}")
    if a.ring != b.ring:
        raise RingMismatchError(f"ring mismatch: {a.ring!r} vs {b.ring!r}")


def _check_cap(a: SparsePoly, cap) -> tuple | None:
    if cap is None:
        return None
    cap = tuple(cap)
    if len(cap) != a.arity:
        raise ArityError(f"cap {cap} does not have arity {a.arity}")
    return cap


def poly_add(a: SparsePoly, b: SparsePoly) -> SparsePoly:
    _check_compatible(a, b)
    out = dict(a._terms)
    for e, c in b._terms.items():
        out[e] = out.get(e, 0) + c
    return SparsePoly._from_clean(a.arity, _normalized(out, a.ring), a.ring)


def truncated_mul(a: SparsePoly, b: SparsePoly, cap: Sequence[int] | None) -> SparsePoly:
    """Product of ``a`` and ``b`` keeping only terms componentwise <= ``cap``.

    With ``cap=None`` this is the full product.
    """
    _check_compatible(a, b)
    cap = _check_cap(a, cap)
    add = operator.add
    acc: dict = {}
    get = acc.get
    if cap is None:
        for ea, ca in a._terms.items():
            for eb, cb in b._terms.items():
                e = tuple(map(add, ea, eb))
                acc[e] = get(e, 0) + ca * cb
    else:
        # prefilter factors: a term already over the cap cannot come back
        ta = [(e, c) for e, c in a._terms.items() if _within(e, cap)]
        tb = [(e, c) for e, c in b._terms.items() if _within(e, cap)]
        for ea, ca in ta:
            room = tuple(map(operator.sub, cap, ea))
            for eb, cb in tb:
                if _within(eb, room):
                    e = tuple(map(add, ea, eb))
                    acc[e] = get(e, 0) + ca * cb
    return SparsePoly._from_clean(a.arity, _normalized(acc, a.ring), a.ring)


def poly_mul(a: SparsePoly, b: SparsePoly) -> SparsePoly:
    return truncated_mul(a, b, None)


def truncate(a: SparsePoly, cap: Sequence[int] | None) -> SparsePoly:
    cap = _check_cap(a, cap)
    if cap is None:
        return a
    return SparsePoly._from_clean(
        a.arity, {e: c for e, c in a._terms.items() if _within(e, cap)}, a.ring)


def poly_pow(a: SparsePoly, e: int, cap: Sequence[int] | None = None) -> SparsePoly:
    """``a**e`` by binary exponentiation, truncating to ``cap`` at every step."""
    if e < 0:
        raise ValueError("negative exponent")
    cap = _check_cap(a, cap)
    result = truncate(SparsePoly.constant(a.arity, 1, a.ring), cap)
    base = truncate(a, cap)
    while e:
        if e & 1:
            result = truncated_mul(result, base, cap)
        e >>= 1
        if e:
            base = truncated_mul(base, base, cap)
    return result


def coeff_of(a: SparsePoly, t: Sequence[int]):
    t = tuple(t)
    if len(t) != a.arity:
        raise ArityError(f"monomial {t} does not have arity {a.arity}")
    return a._terms.get(t, a.ring.zero)


def extract_with_power(P: SparsePoly, N: int, t: Sequence[int]):
    """Coefficient of x^t in P * (x1 + ... + xn)^N, without expanding the power.

    Each term c*x^s of P with s <= t and |t| - |s| = N contributes
    c * N! / prod((t_i - s_i)!) by the multinomial theorem.
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    t = tuple(t)
    if len(t) != P.arity:
        raise ArityError(f"monomial {t} does not have arity {P.arity}")
    if any(e < 0 for e in t):
        return P.ring.zero
    need = sum(t) - N
    total = 0
    for s, c in P._terms.items():
        if sum(s) != need:
            continue
        gaps = [ti - si for ti, si in zip(t, s)]
        if min(gaps) < 0:
            continue
        total += c * multinomial(gaps)
    return P.ring.convert(total)


def _binomial_power(arity: int, i: int, j: int, e: int, ring: Ring, cap) -> SparsePoly:
    # (x_i - x_j)^e for 0-based i < j
    terms = {}
    for a in range(e + 1):
        exps = [0] * arity
        exps[i] = a
        exps[j] = e - a
        if cap is not None and (a > cap[i] or e - a > cap[j]):
            continue
        terms[tuple(exps)] = math.comb(e, a) * (-1) ** (e - a)
    return SparsePoly._from_clean(arity, _normalized(terms, ring), ring)


def vandermonde_power(n: int, e: int, ring: Ring = ZZ,
                      cap: Sequence[int] | None = None) -> SparsePoly:
    """prod_{i<j} (x_i - x_j)^e, truncated to ``cap``."""
    if n < 1:
        raise ValueError("n must be positive")
    if e < 0:
        raise ValueError("exponent must be nonnegative")
    one = SparsePoly.constant(n, 1, ring)
    cap = _check_cap(one, cap)
    result = truncate(one, cap)
    for i in range(n):
        for j in range(i + 1, n):
            result = truncated_mul(result, _binomial_power(n, i, j, e, ring, cap), cap)
    return result


def power_sum_poly(n: int, degree: int = 1, ring: Ring = ZZ) -> SparsePoly:
    """x1^d + ... + xn^d."""
    terms = {}
    for i in range(n):
        exps = [0] * n
        exps[i] = degree
        terms[tuple(exps)] = terms.get(tuple(exps), 0) + 1
    return SparsePoly(n, terms, ring)


def reduce_mod_p(a: SparsePoly, p: int) -> SparsePoly:
    """Image of an integer (or p-integral rational) polynomial in GF(p)[x]."""
    if a.ring not in (ZZ, QQ):
        raise RingMismatchError(f"cannot reduce a polynomial over {a.ring!r}")
    field = GF(p)
    return SparsePoly._from_clean(a.arity, _normalized(a._terms, field), field)


def evaluate(a: SparsePoly, point: Sequence[int]):
    """Evaluate at ``point``; exact in the coefficient ring."""
    if len(point) != a.arity:
        raise ArityError(f"point of length {len(point)} for arity {a.arity}")
    ring = a.ring
    point = [ring.convert(v) for v in point]
    maxdeg = [0] * a.arity
    for exps in a._terms:
        for i, e in enumerate(exps):
            if e > maxdeg[i]:
                maxdeg[i] = e
    # power tables; reduce as we go in prime fields to keep ints small
    tables = []
    for v, d in zip(point, maxdeg):
        row = [ring.one]
        for _ in range(d):
            row.append(ring.convert(row[-1] * v))
        tables.append(row)
    total = 0
    for exps, c in a._terms.items():
        term = c
        for row, e in zip(tables, exps):
            term *= row[e]
        total += term
    return ring.convert(total)


def evaluate_many(a: SparsePoly, points) -> np.ndarray:
    """Evaluate a GF(p) polynomial at every row of ``points`` at once.

    Returns canonical residues.  Only for prime fields with p < 2**31 so that
    products of two residues stay inside int64.
    """
    if not isinstance(a.ring, PrimeField) or a.ring.p >= 2**31:
        raise RingMismatchError("evaluate_many needs GF(p) with p < 2**31")
    p = a.ring.p
    pts = np.asarray(points, dtype=np.int64).reshape(-1, a.arity) % p
    out = np.zeros(len(pts), dtype=np.int64)
    if not a._terms:
        return out
    maxdeg = np.max(np.array(list(a._terms), dtype=np.int64), axis=0)
    tables = []
    for i in range(a.arity):
        col = np.ones((len(pts), int(maxdeg[i]) + 1), dtype=np.int64)
        for d in range(1, int(maxdeg[i]) + 1):
            col[:, d] = col[:, d - 1] * pts[:, i] % p
        tables.append(col)
    for exps, c in a._terms.items():
        term = np.full(len(pts), c, dtype=np.int64)
        for i, e in enumerate(exps):
            if e:
                term = term * tables[i][:, e] % p
        out = (out + term) % p
    return out
