import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rsumsets.morris import MorrisParams, rhs, Identity
from rsumsets.nullstellensatz import (
    CNCertificate,
    GridSets,
    HypothesisError,
    anr_lower_bound,
    build_restriction_poly,
    cn_witness,
    divides,
    extend_sij,
    h_mod_p,
    key_coefficient,
    pair_exponent,
    theorem_h,
)
from rsumsets.polyring import GF, SparsePoly, evaluate
from rsumsets.sumsets import (
    Restriction,
    RestrictionKind,
    SumsetInstance,
    TheoremId,
    auto_prime,
    gen_instance,
    nonvanishing_sums,
)

from conftest import random_poly


def var(n, i, p):
    return SparsePoly.variable(n, i, GF(p))


# ---------------------------------------------------------------- grid sets

def test_grid_sets_validation():
    with pytest.raises(ValueError):
        GridSets(4, ((0, 1),))
    with pytest.raises(ValueError):
        GridSets(5, ((0, 0),))
    with pytest.raises(ValueError):
        GridSets(5, ((5,),))
    assert GridSets(5, ((3, 1),)).sets == ((1, 3),)


# ---------------------------------------------------------------- witness

def test_witness_linear():
    assert cn_witness(var(1, 1, 3), GridSets(3, ((0, 1),)), (1,)) == (1,)


def test_witness_difference_lexicographic():
    f = var(2, 1, 5) - var(2, 2, 5)
    # (0,0) vanishes; (0,1) is the first nonvanishing point in lex order
    assert cn_witness(f, GridSets(5, ((0, 1), (0, 1))), (1, 0)) == (0, 1)


def test_witness_square():
    f = (var(2, 1, 7) - var(2, 2, 7)) ** 2
    assert cn_witness(f, GridSets(7, ((0, 1, 2),) * 2), (2, 0)) == (0, 1)


def test_witness_hypotheses():
    f = var(1, 1, 3)
    with pytest.raises(HypothesisError):
        cn_witness(f, GridSets(3, ((0,),)), (1,))
    with pytest.raises(HypothesisError):
        cn_witness(SparsePoly.variable(1, 1), GridSets(3, ((0, 1),)), (1,))
    g = var(2, 1, 5) * var(2, 2, 5)
    with pytest.raises(HypothesisError):
        cn_witness(g, GridSets(5, ((0, 1, 2),) * 2), (2, 0))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_witness_soundness(seed):
    rng = random.Random(seed)
    p = rng.choice([3, 5, 7])
    n = rng.randint(1, 3)
    f = random_poly(rng, n, 2, 6, GF(p))
    if f.is_zero():
        return
    top = [e for e in f if sum(e) == f.degree()]
    k = rng.choice(top)
    if any(ki >= p for ki in k):
        return
    sets = GridSets(p, tuple(tuple(sorted(rng.sample(range(p), rng.randint(ki + 1, p))))
                             for ki in k))
    point = cn_witness(f, sets, k)
    assert evaluate(f, point) != 0
    # nothing earlier in lex order is a witness
    for q in sets.points():
        if q == point:
            break
        assert evaluate(f, q) == 0


# ---------------------------------------------------------------- ANR bound

def test_anr_difference_has_no_certificate():
    P = var(2, 1, 5) - var(2, 2, 5)
    assert anr_lower_bound(P, GridSets(5, ((0, 1), (2, 3)))) is None


def test_anr_square_bound():
    P = (var(2, 1, 7) - var(2, 2, 7)) ** 2
    cert = anr_lower_bound(P, GridSets(7, ((0, 1, 2),) * 2))
    assert cert == CNCertificate((2, 2), GF(7).convert(-2), 3, 2, 2)


@pytest.mark.parametrize("p,sizes", [(5, (2, 3)), (3, (3, 3)), (7, (3, 3, 2)), (2, (2, 2))])
def test_anr_constant_is_multinomial(p, sizes):
    sets = GridSets(p, tuple(tuple(range(s)) for s in sizes))
    cert = anr_lower_bound(SparsePoly.constant(len(sizes), 1, GF(p)), sets)
    parts = [s - 1 for s in sizes]
    mult = math.factorial(sum(parts)) // math.prod(math.factorial(v) for v in parts)
    if mult % p:
        assert cert.bound == sum(parts) + 1
    else:
        assert cert is None


def test_anr_degree_too_large():
    with pytest.raises(HypothesisError):
        anr_lower_bound(var(1, 1, 3) ** 3, GridSets(3, ((0, 1),)))
    with pytest.raises(HypothesisError):
        anr_lower_bound(SparsePoly.zero(1, GF(3)), GridSets(3, ((0, 1),)))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000))
def test_anr_certificate_sound(seed):
    rng = random.Random(seed)
    p = rng.choice([3, 5, 7])
    n = rng.randint(1, 3)
    sets = tuple(tuple(sorted(rng.sample(range(p), rng.randint(1, p)))) for _ in range(n))
    P = random_poly(rng, n, 2, 4, GF(p))
    grid = GridSets(p, sets)
    if P.is_zero() or P.degree() > sum(len(s) - 1 for s in sets):
        return
    cert = anr_lower_bound(P, grid)
    if cert is None:
        return
    sums = {sum(a) % p for a in itertools.product(*sets) if evaluate(P, a) != 0}
    assert len(sums) >= cert.bound


# ---------------------------------------------------------------- S* and P

@pytest.mark.parametrize("S,size,p,expected", [
    ((), 2, 7, (0, 1)),
    ((3,), 2, 7, (0, 3)),
    ((0, 1), 2, 7, (0, 1)),
    ((-1,), 1, 5, (4,)),
])
def test_extend_sij(S, size, p, expected):
    assert extend_sij(S, size, p) == expected


def test_extend_sij_errors():
    with pytest.raises(HypothesisError):
        extend_sij((0, 1, 2), 2, 7)
    with pytest.raises(HypothesisError):
        extend_sij((), 4, 3)


def _instance(p, n, k, m, A, S=(), restriction=Restriction(), condition="A"):
    return SumsetInstance(p, n, k, m, condition, A, S, restriction)


def test_restriction_poly_pair():
    inst = _instance(7, 2, 3, 1, ((0, 1, 2),) * 2, (((1, 2), (0,)),))
    x1, x2 = var(2, 1, 7), var(2, 2, 7)
    assert build_restriction_poly(inst) == (x1 - x2) * (x1 - x2 - 1)


def test_restriction_poly_trivial():
    inst = _instance(5, 3, 2, 0, ((0, 1),) * 3)
    assert build_restriction_poly(inst) == SparsePoly.constant(3, 1, GF(5))


def test_restriction_poly_linear_prefactor():
    r = Restriction(RestrictionKind.LINEAR, (1,), (((1,), 1),))
    inst = _instance(5, 2, 2, 0, ((0, 1),) * 2, restriction=r)
    assert build_restriction_poly(inst) == var(2, 1, 5)


def test_restriction_poly_ordered_pair_folding():
    # a_2 - a_1 = 3 is the same as a_1 - a_2 = -3
    inst = _instance(7, 2, 3, 1, ((0, 1, 2),) * 2, (((2, 1), (3,)),))
    assert inst.S_of(1, 2) == (4,)
    P = build_restriction_poly(inst)
    for a in itertools.product(range(7), repeat=2):
        if (a[1] - a[0]) % 7 == 3:
            assert evaluate(P, a) == 0


def test_restriction_poly_vanishes_on_forbidden_differences():
    for seed in range(30):
        inst = gen_instance(seed, TheoremId.T1_7, 11, 3, 4, 1)
        P = build_restriction_poly(inst)
        for a in itertools.product(*inst.A):
            bad = any((a[i - 1] - a[j - 1]) % inst.p in s for (i, j), s in inst.S)
            if bad or not inst.restriction.holds(a, inst.p):
                assert evaluate(P, a) == 0


@pytest.mark.parametrize("theorem", list(TheoremId))
def test_restriction_poly_degree(theorem):
    n, k, m = 3, 5, 1
    p = auto_prime(theorem, n, k, m)
    for seed in range(5):
        inst = gen_instance(seed, theorem, p, n, k, m)
        P = build_restriction_poly(inst)
        want = theorem.restriction_kind.degree + math.comb(n, 2) * pair_exponent(inst.condition, m)
        assert P.degree() == want


# ---------------------------------------------------------------- h

def test_theorem_h_values():
    assert theorem_h(TheoremId.T1_5, MorrisParams(2, 1, 2), 1) == -2
    assert theorem_h(TheoremId.T1_5, MorrisParams(2, 1, 2), 0) == 0
    assert theorem_h(TheoremId.T1_3, MorrisParams(2, 1, 1)) == -2
    assert theorem_h(TheoremId.T1_4, MorrisParams(2, 1, 1)) == -1


def test_h_mod_p_and_divides():
    assert h_mod_p(-2, 5) == 3
    assert divides(2, -2) and not divides(3, -2)
    assert h_mod_p(Fraction(-1, 2), 2) is None
    assert h_mod_p(Fraction(-1, 2), 3) == 1


@pytest.mark.parametrize("theorem", [TheoremId.T1_3, TheoremId.T1_4, TheoremId.T1_5,
                                     TheoremId.T1_6, TheoremId.T1_7])
def test_key_coefficient_matches_closed_form(theorem):
    # unprimed forms and the unrestricted staircase agree with the closed forms
    for n in (2, 3):
        for m in (0, 1):
            for k in range(1, 6):
                b = k - 1 - m * (n - 1)
                if b < 0 or (theorem.condition == "B" and (m == 0 or k < n)):
                    continue
                p = 101
                inst = gen_instance(0, theorem, p, n, k, m)
                key = key_coefficient(inst)
                if key is None:
                    continue
                form_sum = inst.restriction.form_sum() if inst.restriction.alpha else 1
                h = theorem_h(theorem, MorrisParams(n, m, b), form_sum)
                assert key == h
                # reduction mod p commutes with the closed form
                assert GF(p).convert(key) == h_mod_p(h, p)


def test_shifted_key_differs_from_per_index_closed_form():
    # linear form on x2 only: the expansion gives 0 while the closed form is -1
    r = Restriction(RestrictionKind.LINEAR, (2,), (((2,), 1),))
    inst = _instance(3, 2, 3, 1, ((0, 1), (0, 1, 2)), (((1, 2), (2,)),), r, "B")
    assert key_coefficient(inst) == 0
    assert theorem_h(TheoremId.T1_5p, MorrisParams(2, 1, 1), 1) == rhs(
        Identity.SHIFTED_LINEAR, MorrisParams(2, 1, 1))


def test_certificate_sound_on_generated_instances():
    for theorem in TheoremId:
        for seed in range(10):
            try:
                inst = gen_instance(seed, theorem, 7, 2, 4, 1)
            except ValueError:
                continue
            P = build_restriction_poly(inst)
            cert = anr_lower_bound(P, inst.grid) if P.degree() <= sum(
                len(a) - 1 for a in inst.A) else None
            if cert is not None:
                assert len(nonvanishing_sums(P, inst)) >= cert.bound
                assert key_coefficient(inst) % 7 != 0
