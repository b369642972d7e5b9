import pytest
from hypothesis import given, strategies as st

from freyelim.criteria import (
    TORSION_FLOORS, IrreducibilityContext, abelianization_torsion, derived_floor, has_torsion_data, ray_class_order,
    split_case_obstruction, torsion_floor, torsion_floor_cited,
)
from freyelim.freycurve import Signature
from freyelim.quadfield import make_field


@pytest.mark.parametrize("m,order", [(-3, 1), (-11, 1), (-19, 1), (-43, 1), (5, 1), (13, 1), (29, 1),
                                     (3, 2), (11, 2), (19, 2), (14, 2), (2, 1)])
def test_ray_class_order(m, order):
    assert ray_class_order(make_field(m)) == order


def test_torsion_floor_examples():
    assert torsion_floor(1, 2) == 13 and torsion_floor(2, 2) == 17
    assert torsion_floor(1, 3) == 5 and torsion_floor(2, 3) == 17
    assert "Kamienny" in torsion_floor_cited(1, 2)[1]
    with pytest.raises(ValueError):
        torsion_floor(3, 2)


@pytest.mark.parametrize("t", [2, 3])
def test_torsion_floor_monotone_in_order(t):
    orders = sorted(o for o, tt in TORSION_FLOORS if tt == t)
    floors = [torsion_floor(o, t) for o in orders]
    assert floors == sorted(floors)


def test_split_case_obstruction():
    assert split_case_obstruction(2) == (3, frozenset({3}))
    assert split_case_obstruction(3) == (8, frozenset({2}))
    assert split_case_obstruction(make_field(5).from_sqrt_coords(3, 0)) == (8, frozenset({2}))
    with pytest.raises(ValueError):
        split_case_obstruction(1)
    with pytest.raises(ValueError):
        split_case_obstruction(make_field(5).from_sqrt_coords(1, 1))


@given(st.integers(2, 10**6))
def test_split_case_obstruction_divisors(g):
    value, primes = split_case_obstruction(g)
    assert value == g * g - 1 and all(value % p == 0 for p in primes)


@pytest.mark.parametrize("m,floor", [(-3, 13), (-11, 13), (5, 13), (13, 13), (3, 17), (11, 17), (19, 17), (14, 17)])
def test_derived_floor(m, floor):
    assert derived_floor(make_field(m), Signature.PPQ2_EFFECTIVE) == floor


def test_irreducibility_context():
    ctx = IrreducibilityContext.for_field(make_field(-19), Signature.PPQ2_EFFECTIVE)
    assert ctx.prime.p == 2 and ctx.t == 2 and ctx.excluded == frozenset({19})
    ctx = IrreducibilityContext.for_field(make_field(5), Signature.PPQ3_APPENDIX, d=14)
    assert ctx.prime.p == 3 and ctx.excluded == frozenset({2, 7})
    with pytest.raises(ValueError):
        IrreducibilityContext.for_field(make_field(-7), Signature.PPQ2_EFFECTIVE)


def test_abelianization_data():
    K = make_field(-43)
    assert abelianization_torsion(K, "D") == [3] == abelianization_torsion(K, "43.1")
    assert abelianization_torsion(K, "PD") == [7]
    assert has_torsion_data(K) and not has_torsion_data(make_field(5))
    with pytest.raises(KeyError):
        abelianization_torsion(make_field(5), "D")
