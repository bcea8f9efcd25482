import random

import pytest
import sympy
from hypothesis import strategies as st

from rsumsets.polyring import GF, ZZ, SparsePoly

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def record_criterion():
    def record(number, passed, detail=""):
        ACCEPTANCE_LINES.append(
            f"[criterion {number}] {'PASS' if passed else 'FAIL'}  {detail}".rstrip())
    return record


def sympy_coeff(expr, gens, target):
    """Independent oracle: expand with sympy and read one coefficient."""
    poly = sympy.Poly(sympy.expand(expr), *gens)
    return poly.coeff_monomial(sympy.Mul(*[g ** e for g, e in zip(gens, target)]))


def to_sympy(poly: SparsePoly, gens):
    return sympy.Add(*[int(c) * sympy.Mul(*[g ** e for g, e in zip(gens, exps)])
                       for exps, c in poly.items()])


@st.composite
def polys(draw, arity=None, max_degree=4, max_terms=6, ring=ZZ, coeffs=(-5, 5)):
    n = draw(st.integers(1, 3)) if arity is None else arity
    terms = draw(st.lists(
        st.tuples(st.tuples(*[st.integers(0, max_degree)] * n),
                  st.integers(*coeffs)),
        max_size=max_terms))
    return SparsePoly(n, terms, ring)


def random_poly(rng: random.Random, arity: int, max_degree: int, max_terms: int, ring=ZZ):
    terms = []
    for _ in range(rng.randint(0, max_terms)):
        exps = tuple(rng.randint(0, max_degree) for _ in range(arity))
        terms.append((exps, rng.randint(-6, 6)))
    return SparsePoly(arity, terms, ring)


@pytest.fixture
def gf5():
    return GF(5)
