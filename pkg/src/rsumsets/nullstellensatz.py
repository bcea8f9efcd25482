"""Polynomial-method machinery over prime fields.

* ``cn_witness``: a nonvanishing point on a product of finite sets, found by
  exhaustive lexicographic search once the top-coefficient hypothesis holds.
* ``anr_lower_bound``: certificate that {a_1+...+a_n : P(a) != 0} has at least
  sum(|A_i| - 1) - deg P + 1 elements, from one coefficient of
  P * (x1+...+xn)^D.
* ``build_restriction_poly``: the polynomial vanishing exactly where a tuple
  violates a sumset instance's restrictions.
* ``theorem_h``: the closed-form integer behind each bound, and the exact
  p-divisibility test on it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import TYPE_CHECKING, Sequence

from .morris import Identity, MorrisParams, rhs
from .polyring import (
    GF,
    ZZ,
    PrimeField,
    Ring,
    SparsePoly,
    coeff_of,
    evaluate,
    extract_with_power,
    factorial,
    truncated_mul,
    vandermonde_power,
)

if TYPE_CHECKING:
    from .sumsets import Restriction, SumsetInstance, TheoremId

__all__ = [
    "HypothesisError",
    "SearchExhausted",
    "GridSets",
    "CNCertificate",
    "cn_witness",
    "anr_lower_bound",
    "extend_sij",
    "restriction_form",
    "build_restriction_poly",
    "pair_exponent",
    "key_coefficient",
    "theorem_h",
    "h_mod_p",
    "divides",
]


class HypothesisError(ValueError):
    """Inputs do not satisfy the hypotheses of the lemma being applied."""


class SearchExhausted(RuntimeError):
    """No witness found although the hypotheses guarantee one."""


@dataclass(frozen=True)
class GridSets:
    p: int
    sets: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        GF(self.p)  # validates primality
        if not self.sets:
            raise ValueError("need at least one set")
        clean = []
        for s in self.sets:
            s = tuple(sorted(s))
            if not s:
                raise ValueError("sets must be nonempty")
            if len(set(s)) != len(s):
                raise ValueError(f"repeated element in {s}")
            if s[0] < 0 or s[-1] >= self.p:
                raise ValueError(f"{s} is not a set of residues mod {self.p}")
            clean.append(s)
        object.__setattr__(self, "sets", tuple(clean))

    @property
    def n(self) -> int:
        return len(self.sets)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.sets)

    def points(self):
        return itertools.product(*self.sets)


@dataclass(frozen=True)
class CNCertificate:
    target_degrees: tuple[int, ...]
    coefficient: int
    bound: int
    poly_degree: int
    power: int

    def to_json(self) -> dict:
        return {
            "target_degrees": list(self.target_degrees),
            "coefficient": str(self.coefficient),
            "bound": self.bound,
            "poly_degree": self.poly_degree,
            "power": self.power,
        }


def _field_of(f: SparsePoly, p: int) -> PrimeField:
    if not isinstance(f.ring, PrimeField) or f.ring.p != p:
        raise HypothesisError(f"polynomial is over {f.ring!r}, sets live in GF({p})")
    return f.ring


def cn_witness(f: SparsePoly, sets: GridSets, k: Sequence[int]) -> tuple[int, ...]:
    """Smallest point of A_1 x ... x A_n (lexicographic) where ``f`` is nonzero.

    Requires |A_i| > k_i, deg f = sum(k) and a nonzero coefficient of x^k.
    """
    _field_of(f, sets.p)
    k = tuple(k)
    if not (f.arity == sets.n == len(k)):
        raise HypothesisError("arity, number of sets and length of k must agree")
    if any(size <= ki for size, ki in zip(sets.sizes, k)):
        raise HypothesisError(f"need |A_i| > k_i, got sizes {sets.sizes} and k = {k}")
    if f.degree() != sum(k):
        raise HypothesisError(f"deg f = {f.degree()} but sum(k) = {sum(k)}")
    if coeff_of(f, k) == 0:
        raise HypothesisError(f"coefficient of x^{k} vanishes")
    for point in sets.points():
        if evaluate(f, point) != 0:
            return point
    raise SearchExhausted(f"no nonvanishing point for {f} on {sets.sets}")


def anr_lower_bound(P: SparsePoly, sets: GridSets) -> CNCertificate | None:
    """Certificate for |{sum(a) : a in prod A_i, P(a) != 0}| >= sum(|A_i|-1) - deg P + 1.

    Returns None when the deciding coefficient vanishes in GF(p).
    """
    _field_of(P, sets.p)
    if P.arity != sets.n:
        raise HypothesisError("arity of P differs from the number of sets")
    if P.is_zero():
        raise HypothesisError("P must be nonzero")
    target = tuple(size - 1 for size in sets.sizes)
    deg = P.degree()
    power = sum(target) - deg
    if power < 0:
        raise HypothesisError(f"deg P = {deg} exceeds sum(|A_i| - 1) = {sum(target)}")
    c = extract_with_power(P, power, target)
    if c == 0:
        return None
    return CNCertificate(target, c, power + 1, deg, power)


def extend_sij(S, size: int, p: int) -> tuple[int, ...]:
    """Pad ``S`` with the smallest missing residues up to ``size`` elements."""
    S = sorted({s % p for s in S})
    if size > p:
        raise HypothesisError(f"cannot have {size} distinct residues mod {p}")
    if len(S) > size:
        raise HypothesisError(f"set of size {len(S)} exceeds target cardinality {size}")
    present = set(S)
    for r in range(p):
        if len(S) >= size:
            break
        if r not in present:
            S.append(r)
    return tuple(sorted(S))


def restriction_form(restriction: "Restriction", n: int, ring: Ring) -> SparsePoly:
    """The linear, diagonal quadratic or bilinear form; 1 when unrestricted."""
    if restriction.kind.value == "none":
        return SparsePoly.constant(n, 1, ring)
    terms: dict = {}
    for idx, alpha in restriction.alpha:
        exps = [0] * n
        if restriction.kind.value == "diagonal-quadratic":
            exps[idx[0] - 1] = 2
        else:
            for i in idx:
                exps[i - 1] += 1
        key = tuple(exps)
        terms[key] = terms.get(key, 0) + alpha
    return SparsePoly(n, terms, ring)


def pair_exponent(condition: str, m: int) -> int:
    """Number of linear factors per pair: 2m under condition A, 2m-1 under B."""
    return 2 * m if condition == "A" else 2 * m - 1


def build_restriction_poly(instance: "SumsetInstance") -> SparsePoly:
    """form(x) * prod_{i<j} prod_{c in S*_ij} (x_i - x_j - c) over GF(p).

    S*_ij is the merged difference set of the pair padded to the condition's
    cardinality, so the product vanishes exactly when some a_i - a_j lies in it.
    """
    p, n = instance.p, instance.n
    field = GF(p)
    size = pair_exponent(instance.condition, instance.m)
    if size < 0:
        raise HypothesisError("condition B needs m >= 1")
    poly = restriction_form(instance.restriction, n, field)
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            for c in extend_sij(instance.S_of(i, j), size, p):
                exps_i = [0] * n
                exps_i[i - 1] = 1
                exps_j = [0] * n
                exps_j[j - 1] = 1
                factor = SparsePoly(n, {tuple(exps_i): 1, tuple(exps_j): -1,
                                        (0,) * n: -c}, field)
                poly = truncated_mul(poly, factor, None)
    return poly


def key_coefficient(instance: "SumsetInstance") -> int | None:
    """Integer coefficient deciding the certificate, computed by expansion.

    It is the coefficient of x^{|A_i|-1} in form * prod(x_i - x_j)^e *
    (x1+...+xn)^D over ZZ, with the form's coefficients taken as their
    representatives in [0, p).  None if the degrees do not fit (D < 0).
    """
    n = instance.n
    e = pair_exponent(instance.condition, instance.m)
    if e < 0:
        return None
    target = tuple(len(a) - 1 for a in instance.A)
    form = restriction_form(instance.restriction, n, ZZ)
    deg = form.degree() + comb(n, 2) * e
    power = sum(target) - deg
    if power < 0:
        return None
    body = truncated_mul(vandermonde_power(n, e, ZZ, target), form, target)
    return extract_with_power(body, power, target)


_THEOREM_IDENTITY = {
    "T1_3": Identity.LEADING,
    "T1_4": Identity.LEADING,
    "T1_5": Identity.LINEAR,
    "T1_5p": Identity.SHIFTED_LINEAR,
    "T1_6": Identity.SQUARE,
    "T1_6p": Identity.SHIFTED_SQUARE,
    "T1_7": Identity.CROSS,
    "T1_7p": Identity.SHIFTED_CROSS,
}


def theorem_h(theorem: "TheoremId", params: MorrisParams, form_sum: int = 1):
    """Closed-form key coefficient h for a theorem, scaled by the form sum.

    Unprimed theorems use the flat-target identities.  Primed ones use the
    staircase coefficient: the leading value divided by n! for the
    unrestricted case, otherwise the shifted closed forms as stated, which
    need not be integral (their per-index form is not reliable; see
    ``key_coefficient`` for the expanded value).  Returns an int when the
    value is integral, else a Fraction.
    """
    name = theorem.name if hasattr(theorem, "name") else str(theorem)
    identity = _THEOREM_IDENTITY[name]
    value = rhs(identity, params)
    if name == "T1_4":
        value = value / factorial(params.n)
    value = Fraction(value) * form_sum
    return value.numerator if value.denominator == 1 else value


def h_mod_p(h, p: int) -> int | None:
    """Residue of h in GF(p); None if h has p in its denominator."""
    h = Fraction(h)
    if h.denominator % p == 0:
        return None
    return GF(p).convert(h)


def divides(p: int, h) -> bool:
    """Whether p divides h (h an integer, or a p-integral rational)."""
    return h_mod_p(h, p) == 0
