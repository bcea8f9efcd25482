import pytest

from rsumsets.expr import ParseError, coefficient, parse, to_poly
from rsumsets.polyring import GF, QQ, SparsePoly, power_sum_poly, vandermonde_power


def test_precedence():
    x1, x2 = SparsePoly.variable(2, 1), SparsePoly.variable(2, 2)
    assert to_poly(parse("x1 + 2*x2^2"), 2) == x1 + 2 * x2 ** 2
    assert to_poly(parse("-x1^2"), 2) == -(x1 ** 2)
    assert to_poly(parse("(x1 - x2)^2 - x1*x1"), 2) == x2 ** 2 - 2 * x1 * x2


def test_builtins():
    assert to_poly(parse("e2"), 3) == SparsePoly(3, {(1, 1, 0): 1, (1, 0, 1): 1, (0, 1, 1): 1})
    assert to_poly(parse("p2"), 2) == power_sum_poly(2, 2)
    assert to_poly(parse("vdm(3,2)"), 3) == vandermonde_power(3, 2)


@pytest.mark.parametrize("text,pos", [("x1 +", 4), ("x1 $ x2", 3), ("vdm(2 2)", 6), ("(x1", 3)])
def test_parse_errors_carry_position(text, pos):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert info.value.pos == pos


def test_coefficient_matches_full_expansion():
    cases = [("vdm(2,2)*(sum)^2", 2, (2, 2)), ("x1*(sum)^3*vdm(2,2)", 2, (3, 3)),
             ("e2*vdm(3,2)*sum^4", 3, (4, 4, 4)), ("(x1+3)*(sum)^2", 2, (1, 1))]
    for text, n, target in cases:
        full = to_poly(parse(text), n)
        assert coefficient(text, n, target) == dict(full.items()).get(target, 0)


def test_coefficient_rings():
    assert coefficient("vdm(2,2)*(sum)^2", 2, (2, 2), GF(5)) == 3
    assert coefficient("x1*x2", 2, (1, 1), QQ) == 1
    with pytest.raises(ValueError):
        coefficient("x1", 2, (1,))
