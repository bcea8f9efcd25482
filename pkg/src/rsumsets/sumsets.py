"""Restricted sumsets over GF(p): instances, theorem registry and verification.

An instance fixes sets A_1..A_n, forbidden differences S_ij and an optional
algebraic restriction.  The restricted sumset is

    C = {a_1 + ... + a_n : a_i in A_i, a_i - a_j not in S_ij for i < j,
         and form(a) != 0}.

Forbidden differences are stored per unordered pair i < j.  A constraint
a_j - a_i not in S_ji is the same as a_i - a_j not in -S_ji, so ordered-pair
input is folded into the i < j set on load.
"""

from __future__ import annotations

import enum
import itertools
import json
import random
import time
from dataclasses import dataclass, field

import numpy as np
from sympy import nextprime

from .morris import MorrisParams
from .nullstellensatz import (
    CNCertificate,
    GridSets,
    anr_lower_bound,
    build_restriction_poly,
    h_mod_p,
    key_coefficient,
    pair_exponent,
    theorem_h,
)
from .polyring import GF, evaluate_many

__all__ = [
    "InfeasibleError",
    "ConditionMismatch",
    "RestrictionKind",
    "Restriction",
    "SumsetInstance",
    "TheoremId",
    "VerifyReport",
    "theorem_bound",
    "prime_threshold",
    "auto_prime",
    "enumerate_C",
    "gen_instance",
    "verify",
    "sample_subset",
]


class InfeasibleError(ValueError):
    """Requested sizes cannot be realized in GF(p)."""


class ConditionMismatch(ValueError):
    """Instance and theorem disagree on the size condition or restriction type."""


class RestrictionKind(enum.Enum):
    NONE = "none"
    LINEAR = "linear"
    DIAGONAL = "diagonal-quadratic"
    BILINEAR = "bilinear"

    @property
    def degree(self) -> int:
        return {"none": 0, "linear": 1}.get(self.value, 2)


@dataclass(frozen=True)
class Restriction:
    """An algebraic side condition form(a) != 0.

    ``alpha`` pairs an index tuple with its coefficient: ``((i,), a_i)`` for
    the linear and diagonal forms, ``((i, j), a_ij)`` with i != j for the
    bilinear form.  Indices are 1-based.
    """

    kind: RestrictionKind = RestrictionKind.NONE
    T: tuple[int, ...] = ()
    alpha: tuple[tuple[tuple[int, ...], int], ...] = ()

    def form_sum(self) -> int:
        return sum(a for _, a in self.alpha)

    def holds(self, point, p: int) -> bool:
        if self.kind is RestrictionKind.NONE:
            return True
        total = 0
        for idx, a in self.alpha:
            if self.kind is RestrictionKind.LINEAR:
                total += a * point[idx[0] - 1]
            elif self.kind is RestrictionKind.DIAGONAL:
                total += a * point[idx[0] - 1] ** 2
            else:
                total += a * point[idx[0] - 1] * point[idx[1] - 1]
        return total % p != 0

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "T": list(self.T),
            "alpha": [[*idx, a] for idx, a in self.alpha],
        }

    @classmethod
    def from_json(cls, data) -> "Restriction":
        if not data:
            return cls()
        kind = RestrictionKind(data.get("kind", "none"))
        width = 2 if kind is RestrictionKind.BILINEAR else 1
        alpha = tuple((tuple(int(v) for v in row[:width]), int(row[width]))
                      for row in data.get("alpha", []))
        return cls(kind, tuple(int(t) for t in data.get("T", [])), alpha)


class TheoremId(enum.Enum):
    T1_3 = "t1_3"
    T1_4 = "t1_4"
    T1_5 = "t1_5"
    T1_5p = "t1_5p"
    T1_6 = "t1_6"
    T1_6p = "t1_6p"
    T1_7 = "t1_7"
    T1_7p = "t1_7p"

    @property
    def condition(self) -> str:
        return "B" if self in _PRIMED else "A"

    @property
    def restriction_kind(self) -> RestrictionKind:
        return _RESTRICTION[self.name.rstrip("p")]

    @property
    def offset(self) -> int:
        # shift of both the bound and the prime threshold relative to T1_3
        return {RestrictionKind.NONE: 0, RestrictionKind.LINEAR: 1}.get(
            self.restriction_kind, 2)


_PRIMED = {TheoremId.T1_4, TheoremId.T1_5p, TheoremId.T1_6p, TheoremId.T1_7p}
_RESTRICTION = {
    "T1_3": RestrictionKind.NONE,
    "T1_4": RestrictionKind.NONE,
    "T1_5": RestrictionKind.LINEAR,
    "T1_6": RestrictionKind.DIAGONAL,
    "T1_7": RestrictionKind.BILINEAR,
}


def theorem_bound(theorem: TheoremId, n: int, k: int, m: int) -> int:
    return (k + m - m * n - 1) * n + 1 - theorem.offset


def prime_threshold(theorem: TheoremId, n: int, k: int, m: int) -> int:
    """The hypothesis on the characteristic is p > prime_threshold(...)."""
    return max(m * n, (k - 1) * n - m * n * (n - 1) - theorem.offset)


def auto_prime(theorem: TheoremId, n: int, k: int, m: int) -> int:
    """Smallest prime above the threshold that can also hold a k-element set."""
    p = nextprime(prime_threshold(theorem, n, k, m))
    while p < k:
        p = nextprime(p)
    return p


@dataclass(frozen=True)
class SumsetInstance:
    p: int
    n: int
    k: int
    m: int
    condition: str
    A: tuple[tuple[int, ...], ...]
    S: tuple[tuple[tuple[int, int], tuple[int, ...]], ...] = ()
    restriction: Restriction = field(default_factory=Restriction)
    seed: object = None

    def __post_init__(self):
        GF(self.p)
        if self.condition not in ("A", "B"):
            raise ValueError(f"condition must be 'A' or 'B', got {self.condition!r}")
        if len(self.A) != self.n:
            raise ValueError(f"expected {self.n} sets, got {len(self.A)}")
        A = []
        for a in self.A:
            a = tuple(sorted(a))
            if len(set(a)) != len(a) or any(not 0 <= v < self.p for v in a):
                raise ValueError(f"{a} is not a set of residues mod {self.p}")
            A.append(a)
        merged: dict = {}
        for (i, j), s in self.S:
            if i == j or not (1 <= i <= self.n and 1 <= j <= self.n):
                raise ValueError(f"bad pair ({i}, {j})")
            if i > j:
                i, j, s = j, i, [-v for v in s]
            merged.setdefault((i, j), set()).update(v % self.p for v in s)
        object.__setattr__(self, "A", tuple(A))
        object.__setattr__(self, "S", tuple(
            (key, tuple(sorted(merged[key]))) for key in sorted(merged)))

    def S_of(self, i: int, j: int) -> tuple[int, ...]:
        for key, s in self.S:
            if key == (i, j):
                return s
        return ()

    @property
    def grid(self) -> GridSets:
        return GridSets(self.p, self.A)

    def without_restrictions(self, keep_form: bool = False) -> "SumsetInstance":
        return SumsetInstance(self.p, self.n, self.k, self.m, self.condition, self.A, (),
                              self.restriction if keep_form else Restriction(), self.seed)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "n": self.n,
            "k": self.k,
            "m": self.m,
            "condition": self.condition,
            "A": [list(a) for a in self.A],
            "S": [{"i": i, "j": j, "set": list(s)} for (i, j), s in self.S],
            "restriction": self.restriction.to_json(),
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, data) -> "SumsetInstance":
        if isinstance(data, str):
            data = json.loads(data)
        S = tuple(((int(e["i"]), int(e["j"])), tuple(int(v) for v in e["set"]))
                  for e in data.get("S", []))
        return cls(int(data["p"]), int(data["n"]), int(data["k"]), int(data["m"]),
                   data.get("condition", "A"), tuple(tuple(a) for a in data["A"]), S,
                   Restriction.from_json(data.get("restriction")), data.get("seed"))


def _set_sizes(condition: str, n: int, k: int) -> list[int]:
    if condition == "A":
        return [k] * n
    return [k - n + i for i in range(1, n + 1)]


def _difference_cap(condition: str, m: int) -> int:
    # |S_ij| <= 2m under A, |S_ij| < 2m under B
    return 2 * m if condition == "A" else 2 * m - 1


def enumerate_C(instance: SumsetInstance) -> tuple[frozenset, int]:
    """All distinct sums over admissible tuples, by exhaustive search."""
    p = instance.p
    forbidden = [(i - 1, j - 1, frozenset(s)) for (i, j), s in instance.S if s]
    restriction = instance.restriction
    sums = set()
    for point in itertools.product(*instance.A):
        if any((point[i] - point[j]) % p in s for i, j, s in forbidden):
            continue
        if not restriction.holds(point, p):
            continue
        sums.add(sum(point) % p)
    return frozenset(sums), len(sums)


def nonvanishing_sums(poly, instance: SumsetInstance) -> frozenset:
    """{sum(a) : a in prod A_i, poly(a) != 0}."""
    points = np.array(list(itertools.product(*instance.A)), dtype=np.int64)
    if not len(points):
        return frozenset()
    values = evaluate_many(poly, points)
    keep = points[values != 0]
    return frozenset(int(v) for v in keep.sum(axis=1) % instance.p)


# --------------------------------------------------------------------------
# random instances
# --------------------------------------------------------------------------

def sample_subset(rng: random.Random, population: int, size: int, offset: int = 0) -> tuple[int, ...]:
    """Uniform ``size``-subset of range(offset, offset + population), sorted.

    Reservoir sampling (Algorithm R): keep the first ``size`` items, then item
    t replaces slot ``rng.randrange(t + 1)`` when that slot is < size.
    """
    if not 0 <= size <= population:
        raise InfeasibleError(f"cannot pick {size} of {population} elements")
    reservoir = list(range(size))
    for t in range(size, population):
        slot = rng.randrange(t + 1)
        if slot < size:
            reservoir[slot] = t
    return tuple(sorted(v + offset for v in reservoir))


def _random_restriction(rng: random.Random, kind: RestrictionKind, n: int, p: int) -> Restriction:
    if kind is RestrictionKind.NONE:
        return Restriction()
    least = 2 if kind is RestrictionKind.BILINEAR else 1
    if n < least:
        raise InfeasibleError(f"{kind.value} restriction needs n >= {least}")
    size = rng.randint(least, n)
    T = sample_subset(rng, n, size, offset=1)
    keys = list(itertools.permutations(T, 2)) if kind is RestrictionKind.BILINEAR \
        else [(i,) for i in T]
    while True:
        alpha = tuple((key, rng.randrange(p)) for key in keys)
        if sum(a for _, a in alpha) % p:
            return Restriction(kind, T, alpha)


def gen_instance(seed, theorem: TheoremId, p: int, n: int, k: int, m: int) -> SumsetInstance:
    """Seeded random instance meeting the theorem's size and form hypotheses.

    The generator is ``random.Random`` seeded with the string
    ``"{seed}:{theorem}:{p}:{n}:{k}:{m}"``.  Draw order: each A_i, then for
    each pair i < j a size uniform in [0, cap] followed by the subset, then T
    and the form coefficients (redrawn until their sum is nonzero mod p).
    """
    GF(p)
    condition = theorem.condition
    if n < 1 or k < 1 or m < 0:
        raise InfeasibleError("need n >= 1, k >= 1, m >= 0")
    if condition == "B" and k < n:
        raise InfeasibleError(f"condition B needs k >= n, got k={k}, n={n}")
    cap = _difference_cap(condition, m)
    if cap < 0:
        raise InfeasibleError("condition B needs m >= 1 (|S_ij| < 2m)")
    if k > p:
        raise InfeasibleError(f"cannot fit {k} residues in GF({p})")
    rng = random.Random(f"{seed}:{theorem.value}:{p}:{n}:{k}:{m}")
    A = tuple(sample_subset(rng, p, size) for size in _set_sizes(condition, n, k))
    S = []
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            size = rng.randint(0, min(cap, p))
            S.append(((i, j), sample_subset(rng, p, size)))
    restriction = _random_restriction(rng, theorem.restriction_kind, n, p)
    return SumsetInstance(p, n, k, m, condition, A, tuple(S), restriction, seed)


# --------------------------------------------------------------------------
# verification
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class VerifyReport:
    instance: SumsetInstance
    theorem: TheoremId
    hypotheses_ok: bool
    reasons: tuple[str, ...]
    cardinality: int | None
    bound: int
    passed: bool
    trivial: bool = False
    certificate: CNCertificate | None = None
    certificate_checked: bool = False
    nonvanishing: int | None = None
    h: object = None
    h_mod_p: int | None = None
    key: int | None = None
    elapsed: float = 0.0

    @property
    def certificate_sound(self) -> bool | None:
        if self.certificate is None or self.nonvanishing is None:
            return None
        return self.nonvanishing >= self.certificate.bound

    def to_json(self) -> dict:
        inst = self.instance
        return {
            "theorem": self.theorem.value,
            "p": inst.p, "n": inst.n, "k": inst.k, "m": inst.m,
            "condition": inst.condition,
            "seed": inst.seed,
            "hypotheses_ok": self.hypotheses_ok,
            "reasons": list(self.reasons),
            "cardinality": self.cardinality,
            "bound": self.bound,
            "passed": self.passed,
            "trivial": self.trivial,
            "certificate": self.certificate.to_json() if self.certificate else None,
            "certificate_checked": self.certificate_checked,
            "nonvanishing": self.nonvanishing,
            "h": None if self.h is None else str(self.h),
            "h_mod_p": self.h_mod_p,
            "key_coefficient": None if self.key is None else str(self.key),
            "bilinear_reading": "global" if inst.restriction.kind is RestrictionKind.BILINEAR else None,
            "ms": round(self.elapsed * 1000, 3),
        }


def _hypotheses(instance: SumsetInstance, theorem: TheoremId) -> list[str]:
    p, n, k, m = instance.p, instance.n, instance.k, instance.m
    reasons = []
    threshold = prime_threshold(theorem, n, k, m)
    if p <= threshold:
        reasons.append(f"p = {p} <= threshold {threshold}")
    sizes = [len(a) for a in instance.A]
    want = _set_sizes(instance.condition, n, k)
    if sizes != want:
        reasons.append(f"set sizes {sizes} != required {want}")
    cap = _difference_cap(instance.condition, m)
    for (i, j), s in instance.S:
        if len(s) > cap:
            reasons.append(f"|S_{i}{j}| = {len(s)} exceeds {max(cap, 0)}")
    if cap < 0:
        reasons.append("condition B needs m >= 1")
    if instance.restriction.kind is not RestrictionKind.NONE:
        if instance.restriction.form_sum() % p == 0:
            reasons.append("form coefficients sum to 0 mod p")
        if not instance.restriction.T:
            reasons.append("restriction index set T is empty")
    return reasons


def verify(instance: SumsetInstance, theorem: TheoremId, force: bool = False,
           certify: bool = True) -> VerifyReport:
    """Check a theorem's hypotheses on ``instance`` and its bound by enumeration.

    Bounds <= 0 hold trivially and are not enumerated unless ``force``.  With
    ``certify`` the polynomial-method certificate is computed whenever the
    degrees allow, and its bound is checked against the set of nonvanishing
    sums.
    """
    start = time.perf_counter()
    if instance.condition != theorem.condition:
        raise ConditionMismatch(f"{theorem.value} needs condition {theorem.condition}, "
                                f"instance has {instance.condition}")
    if instance.restriction.kind is not theorem.restriction_kind:
        raise ConditionMismatch(f"{theorem.value} needs a {theorem.restriction_kind.value} "
                                f"restriction, instance has {instance.restriction.kind.value}")
    p, n, k, m = instance.p, instance.n, instance.k, instance.m
    reasons = _hypotheses(instance, theorem)
    ok = not reasons
    bound = theorem_bound(theorem, n, k, m)
    trivial = bound <= 0

    cardinality = None
    if not trivial or force:
        cardinality = enumerate_C(instance)[1]

    certificate, nonvanishing, checked = None, None, False
    h = residue = key = None
    b = k - 1 - m * (n - 1)
    fits = all(len(s) <= pair_exponent(instance.condition, m) for _, s in instance.S)
    if certify and b >= 0 and pair_exponent(instance.condition, m) >= 0 and fits \
            and all(len(a) >= 1 for a in instance.A):
        key = key_coefficient(instance)
        if key is not None:
            h = theorem_h(theorem, MorrisParams(n, m, b),
                          instance.restriction.form_sum() if instance.restriction.alpha else 1)
            residue = h_mod_p(h, p)
            P = build_restriction_poly(instance)
            if not P.is_zero():
                checked = True
                certificate = anr_lower_bound(P, instance.grid)
                if certificate is not None:
                    nonvanishing = len(nonvanishing_sums(P, instance))

    passed = ok and (trivial or cardinality >= bound)
    return VerifyReport(instance, theorem, ok, tuple(reasons), cardinality, bound, passed,
                        trivial, certificate, checked, nonvanishing, h, residue, key,
                        time.perf_counter() - start)
