"""Morris-type coefficient identities: closed forms versus polynomial expansion.

Every identity concerns a coefficient of

    prefactor * (x1 + ... + xn)^N * prod_{i<j} (x_i - x_j)^e

at a target monomial.  The unshifted family uses e = 2m and the flat target
x_l^{b+m(n-1)}; the shifted family uses e = 2m-1 and the staircase target
x_l^{b+m(n-1)-n+l}.  ``lhs`` expands, ``rhs`` evaluates the closed form, and
``check_identity`` compares them exactly.

The shifted identities are only claimed per index in their closed form.  The
expansion shows they hold after summing over the index, not index by index,
so per-index and symmetrized results are reported separately.
"""

from __future__ import annotations

import enum
import functools
import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Sequence

from .polyring import (
    ZZ,
    SparsePoly,
    coeff_of,
    extract_with_power,
    factorial,
    power_sum_poly,
    truncate,
    truncated_mul,
    vandermonde_power,
)

__all__ = [
    "PreconditionError",
    "MorrisParams",
    "Identity",
    "IdentityId",
    "IdentityReport",
    "delta",
    "rhs",
    "lhs",
    "check_identity",
    "antisymmetrize_check",
    "lemma21_sides",
    "grid_check",
    "index_choices",
]


class PreconditionError(ValueError):
    """Parameters outside the range where an identity is stated."""


@dataclass(frozen=True, order=True)
class MorrisParams:
    n: int
    m: int
    b: int

    def __post_init__(self):
        if self.n < 1 or self.m < 0 or self.b < 0:
            raise ValueError(f"invalid parameters n={self.n}, m={self.m}, b={self.b}")

    @property
    def k(self) -> int:
        """Set size paired with these parameters: b + m(n-1) = k - 1."""
        return self.b + self.m * (self.n - 1) + 1

    @property
    def sign(self) -> int:
        return -1 if (self.m * comb(self.n, 2)) % 2 else 1


class Identity(enum.Enum):
    LEADING = "leading"
    SQUARE = "square"
    LINEAR = "linear"
    CROSS = "cross"
    SHIFTED_LINEAR = "shifted-linear"
    SHIFTED_SQUARE = "shifted-square"
    SHIFTED_CROSS = "shifted-cross"
    LEMMA21 = "lemma21"

    @property
    def shifted(self) -> bool:
        return self.value.startswith("shifted")

    @property
    def unshifted(self) -> "Identity":
        return _UNSHIFT.get(self, self)

    @property
    def index_kind(self) -> str | None:
        if self in (Identity.SQUARE, Identity.LINEAR,
                    Identity.SHIFTED_LINEAR, Identity.SHIFTED_SQUARE):
            return "r"
        if self in (Identity.CROSS, Identity.SHIFTED_CROSS):
            return "ij"
        return None

    @property
    def power_deficit(self) -> int:
        """Degree of the prefactor, i.e. nb - N."""
        if self in (Identity.LINEAR, Identity.SHIFTED_LINEAR):
            return 1
        if self in (Identity.LEADING, Identity.LEMMA21):
            return 0
        return 2

    @property
    def order(self) -> int:
        return list(Identity).index(self)


_UNSHIFT = {
    Identity.SHIFTED_LINEAR: Identity.LINEAR,
    Identity.SHIFTED_SQUARE: Identity.SQUARE,
    Identity.SHIFTED_CROSS: Identity.CROSS,
}


@dataclass(frozen=True)
class IdentityId:
    kind: Identity
    indices: tuple[int, ...] | None = None

    @classmethod
    def parse(cls, text: str) -> "IdentityId":
        """``"leading"``, ``"linear"``, ``"linear:2"``, ``"cross:1,3"``."""
        name, _, idx = text.strip().lower().partition(":")
        kind = Identity(name.replace("_", "-"))
        indices = tuple(int(v) for v in idx.split(",")) if idx else None
        return cls(kind, indices)

    def __str__(self):
        if self.indices is None:
            return self.kind.value
        return f"{self.kind.value}:{','.join(map(str, self.indices))}"

    def sort_key(self):
        return (self.kind.order, self.indices or ())


def index_choices(kind: Identity, n: int) -> list[tuple[int, ...]]:
    if kind.index_kind == "r":
        return [(r,) for r in range(1, n + 1)]
    if kind.index_kind == "ij":
        return list(itertools.permutations(range(1, n + 1), 2))
    return []


@dataclass(frozen=True)
class IdentityReport:
    """Outcome of one exact comparison.

    For an index-bearing identity checked over all indices, ``lhs`` is the
    sum over the indices, ``rhs`` the closed form times the number of indices,
    and ``per_index`` holds one report per index.  ``lemma21`` is the
    symmetrized value predicted by the antisymmetrization relation for the
    shifted family.
    """

    id: IdentityId
    n: int
    m: int
    b: int | None
    lhs: Fraction | None
    rhs: Fraction | None
    equal: bool
    skipped: bool = False
    reason: str | None = None
    elapsed: float = 0.0
    k: int | None = None
    per_index: tuple["IdentityReport", ...] = ()
    lemma21: Fraction | None = None
    note: str | None = None

    @property
    def indices(self) -> list[tuple[int, ...]] | None:
        if self.per_index:
            return [r.id.indices for r in self.per_index]
        return [self.id.indices] if self.id.indices is not None else None

    @property
    def per_index_equal(self) -> bool:
        return all(r.equal for r in self.per_index)

    @property
    def ok(self) -> bool:
        """Equal, including index by index where that was evaluated."""
        return self.skipped or (self.equal and self.per_index_equal)

    def sort_key(self):
        return (self.id.sort_key(), self.n, self.m,
                -1 if self.b is None else self.b, self.k or 0)

    def to_json(self) -> dict:
        out = {
            "id": str(self.id),
            "n": self.n,
            "m": self.m,
            "b": self.b,
            "indices": [list(i) for i in self.indices] if self.indices else None,
            "lhs": None if self.lhs is None else str(self.lhs),
            "rhs": None if self.rhs is None else str(self.rhs),
            "equal": self.equal,
            "skipped": self.skipped,
            "reason": self.reason,
            "ms": round(self.elapsed * 1000, 3),
        }
        if self.k is not None:
            out["k"] = self.k
        if self.per_index:
            out["per_index"] = [
                {"indices": list(r.id.indices), "lhs": str(r.lhs),
                 "rhs": str(r.rhs), "equal": r.equal}
                for r in self.per_index
            ]
            out["per_index_equal"] = self.per_index_equal
        if self.lemma21 is not None:
            out["lemma21"] = str(self.lemma21)
        if self.note is not None:
            out["note"] = self.note
        return out


# --------------------------------------------------------------------------
# closed forms
# --------------------------------------------------------------------------

def delta(params: MorrisParams) -> Fraction:
    """prod_{l=0}^{n-1} (m(l+1))! / ((b+ml)! m!)."""
    n, m, b = params.n, params.m, params.b
    out = Fraction(1)
    for l in range(n):
        out *= Fraction(factorial(m * (l + 1)), factorial(b + m * l) * factorial(m))
    return out


def _check_preconditions(kind: Identity, params: MorrisParams,
                         indices: Sequence[int] | None = None) -> None:
    n, m, b = params.n, params.m, params.b
    if kind.shifted or kind is Identity.LEMMA21:
        if m < 1:
            raise PreconditionError(f"{kind.value} needs m >= 1 (Vandermonde exponent 2m-1)")
    need = kind.power_deficit
    if n * b < need:
        raise PreconditionError(f"{kind.value} needs nb >= {need}, got nb = {n * b}")
    if kind.index_kind == "ij" and n < 2:
        raise PreconditionError(f"{kind.value} needs two distinct indices (n >= 2)")
    if indices is not None:
        if kind.index_kind is None:
            raise PreconditionError(f"{kind.value} takes no indices")
        want = 1 if kind.index_kind == "r" else 2
        if len(indices) != want or not all(1 <= v <= n for v in indices):
            raise PreconditionError(f"bad indices {tuple(indices)} for {kind.value}, n={n}")
        if want == 2 and indices[0] == indices[1]:
            raise PreconditionError("cross identities need i != j")


def rhs(id: IdentityId | Identity, params: MorrisParams) -> Fraction:
    """Closed-form right-hand side (independent of the index, if any).

    ``LEMMA21`` has no closed form of its own; its right side is
    n! times the staircase coefficient, computed by expansion.
    """
    kind = id.kind if isinstance(id, IdentityId) else id
    _check_preconditions(kind, params)
    if kind is Identity.LEMMA21:
        return lemma21_sides(params.n, params.m, params.k,
                             power_sum_poly(params.n) ** (params.n * params.b))[1]
    n, m, b = params.n, params.m, params.b
    nb = n * b
    base = params.sign * delta(params)
    unshifted = kind.unshifted
    if unshifted is Identity.LEADING:
        value = factorial(nb) * base
    elif unshifted is Identity.LINEAR:
        value = b * factorial(nb - 1) * base
    elif unshifted is Identity.SQUARE:
        value = b * (b - m * (n - 1) - 1) * factorial(nb - 2) * base
    else:
        value = b * (b + m) * factorial(nb - 2) * base
    if kind.shifted:
        value /= factorial(n)
    return Fraction(value)


# --------------------------------------------------------------------------
# expansions
# --------------------------------------------------------------------------

def _target(params: MorrisParams, shifted: bool) -> tuple[int, ...]:
    n, m, b = params.n, params.m, params.b
    top = b + m * (n - 1)
    if shifted:
        return tuple(top - n + l for l in range(1, n + 1))
    return (top,) * n


@functools.lru_cache(maxsize=256)
def _vandermonde_capped(n: int, e: int, cap: tuple[int, ...]) -> SparsePoly:
    return vandermonde_power(n, e, ZZ, cap)


def _prefactor(kind: Identity, n: int, indices: Sequence[int]) -> SparsePoly:
    exps = [0] * n
    if kind.index_kind == "ij":
        exps[indices[0] - 1] += 1
        exps[indices[1] - 1] += 1
    elif kind.unshifted is Identity.SQUARE:
        exps[indices[0] - 1] += 2
    else:
        exps[indices[0] - 1] += 1
    return SparsePoly.monomial(exps)


def lhs(id: IdentityId, params: MorrisParams) -> Fraction:
    """Left-hand side by expansion, for one index choice."""
    kind = id.kind
    if kind is Identity.LEMMA21:
        return lemma21_sides(params.n, params.m, params.k,
                             power_sum_poly(params.n) ** (params.n * params.b))[0]
    if kind.index_kind is not None and id.indices is None:
        raise PreconditionError(f"{kind.value} needs explicit indices")
    _check_preconditions(kind, params, id.indices)
    n = params.n
    target = _target(params, kind.shifted)
    e = 2 * params.m - 1 if kind.shifted else 2 * params.m
    poly = _vandermonde_capped(n, e, target)
    if kind.index_kind is not None:
        poly = truncated_mul(poly, _prefactor(kind, n, id.indices), target)
    N = n * params.b - kind.power_deficit
    return Fraction(extract_with_power(poly, N, target))


def lemma21_sides(n: int, m: int, k: int, L: SparsePoly) -> tuple[Fraction, Fraction]:
    """Both sides of the antisymmetrization relation.

    Left: coefficient of x1^{k-1}...xn^{k-1} in prod(x_i - x_j)^{2m} * L.
    Right: n! times the coefficient of x1^{k-n}...xn^{k-1} in
    prod(x_i - x_j)^{2m-1} * L.
    """
    if L.arity != n:
        raise PreconditionError(f"L has arity {L.arity}, expected {n}")
    if m < 1 or k < 1:
        raise PreconditionError("need m >= 1 and k >= 1")
    flat = (k - 1,) * n
    stair = tuple(k - n + l - 1 for l in range(1, n + 1))
    left = _capped_coeff(n, 2 * m, L, flat)
    right = factorial(n) * _capped_coeff(n, 2 * m - 1, L, stair)
    return Fraction(left), Fraction(right)


def _capped_coeff(n: int, e: int, L: SparsePoly, target: tuple[int, ...]):
    if min(target) < 0:
        return 0
    V = _vandermonde_capped(n, e, target).change_ring(L.ring)
    prod = truncated_mul(V, truncate(L, target), target)
    return coeff_of(prod, target)


# --------------------------------------------------------------------------
# checks
# --------------------------------------------------------------------------

def _skip(id: IdentityId, params: MorrisParams, reason: str) -> IdentityReport:
    return IdentityReport(id, params.n, params.m, params.b, None, None, False,
                          skipped=True, reason=reason)


def check_identity(id: IdentityId, params: MorrisParams) -> IdentityReport:
    """Compare both sides exactly.  Precondition failures give a skipped report."""
    start = time.perf_counter()
    kind = id.kind
    try:
        _check_preconditions(kind, params, id.indices)
    except PreconditionError as exc:
        return _skip(id, params, str(exc))

    if kind is Identity.LEMMA21:
        left, right = lemma21_sides(params.n, params.m, params.k,
                                    power_sum_poly(params.n) ** (params.n * params.b))
        return IdentityReport(id, params.n, params.m, params.b, left, right,
                              left == right, elapsed=time.perf_counter() - start,
                              k=params.k, note="L = (x1+...+xn)^(nb)")

    closed = rhs(kind, params)
    if kind.index_kind is None or id.indices is not None:
        value = lhs(id, params)
        return IdentityReport(id, params.n, params.m, params.b, value, closed,
                              value == closed, elapsed=time.perf_counter() - start)

    per_index = []
    for idx in index_choices(kind, params.n):
        sub = IdentityId(kind, idx)
        value = lhs(sub, params)
        per_index.append(IdentityReport(sub, params.n, params.m, params.b,
                                        value, closed, value == closed))
    total = sum((r.lhs for r in per_index), Fraction(0))
    expected = closed * len(per_index)
    lemma_value = None
    equal = total == expected
    if kind.shifted:
        # summing the prefactor over indices gives a symmetric L, so the
        # relation transfers the unshifted sum down by a factor n!
        unshifted_sum = sum((lhs(IdentityId(kind.unshifted, idx), params)
                             for idx in index_choices(kind, params.n)), Fraction(0))
        lemma_value = unshifted_sum / factorial(params.n)
        equal = equal and total == lemma_value
    return IdentityReport(id, params.n, params.m, params.b, total, expected, equal,
                          elapsed=time.perf_counter() - start,
                          per_index=tuple(per_index), lemma21=lemma_value)


def antisymmetrize_check(m: int, k: int, n: int, L: SparsePoly) -> IdentityReport:
    """Check the relation between the flat coefficient of the even Vandermonde
    power and n! times the staircase coefficient of the odd one, for a
    symmetric multiplier ``L``.

    Raises ``PreconditionError`` if ``L`` is not symmetric.
    """
    start = time.perf_counter()
    if L.arity != n:
        raise PreconditionError(f"L has arity {L.arity}, expected {n}")
    if not L.is_symmetric():
        raise PreconditionError("L is not symmetric in its variables")
    left, right = lemma21_sides(n, m, k, L)
    b = k - 1 - m * (n - 1)
    return IdentityReport(IdentityId(Identity.LEMMA21), n, m, b if b >= 0 else None,
                          left, right, left == right,
                          elapsed=time.perf_counter() - start, k=k, note=L.to_text())


def _check_point(args) -> IdentityReport:
    id, params = args
    return check_identity(id, params)


def grid_check(ids: Iterable[IdentityId], n_range: Iterable[int], m_range: Iterable[int],
               b_range: Iterable[int], workers: int | None = None) -> list[IdentityReport]:
    """Check every identity at every (n, m, b); deterministic order."""
    ids = sorted(set(ids), key=IdentityId.sort_key)
    points = [(id, MorrisParams(n, m, b))
              for id in ids
              for n in sorted(set(n_range))
              for m in sorted(set(m_range))
              for b in sorted(set(b_range))]
    if workers and workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_check_point, points, chunksize=4))
    else:
        reports = [_check_point(p) for p in points]
    return sorted(reports, key=IdentityReport.sort_key)
