import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from freyelim.freycurve import (
    LemmaHypothesisError, Reduction, Signature, SolutionTriple, WeierstrassModel, build_frey, check_closed_forms,
    closed_forms, curve_from_mu, inertia_order_p_test, invariants, lambda_mu, lambda_of_model, local_data,
    theoremA_case_analysis, vj_formula, vj_lambda_appendix,
)
from freyelim.quadfield import make_field, split_prime, valuation
from triples import random_triple, random_triple_2b, random_triple_3b


def test_signature_parse():
    assert Signature.parse("ppq3") is Signature.PPQ3_APPENDIX
    assert Signature.parse("PPQ2_GENERAL") is Signature.PPQ2_GENERAL
    assert Signature.PPQ3_APPENDIX.torsion_t == 3 and Signature.PPQ2_EFFECTIVE.torsion_t == 2
    with pytest.raises(ValueError):
        Signature.parse("ppp")


def test_trivial_rejected():
    K = make_field(5)
    t = SolutionTriple.make("ppq2-general", K, 1, -1, 0, 5)
    with pytest.raises(ValueError, match="trivial"):
        build_frey(t)


def test_equation_failure_rejected():
    t = SolutionTriple.make("ppq2-effective", make_field(2), -1, 1, 2, 5, d=2)
    assert not t.satisfies_equation()
    with pytest.raises(ValueError):
        build_frey(t)


def test_even_p_rejected():
    with pytest.raises(ValueError):
        SolutionTriple.make("ppq2-effective", make_field(3), 1, 2, 5, 4, d=3)


def test_e1_example():
    K = make_field(3)
    t = SolutionTriple.make("ppq2-effective", K, 1, 2, 5, 3, d=3)
    assert t.satisfies_equation() and t.is_primitive()
    E = build_frey(t)
    assert E.a1 == 1 and E.a2 == 1 and E.a4 == Fraction(3, 8) and E.a6 == 0
    inv = invariants(E)
    assert (inv.c4, inv.c6, inv.delta) == (7, 10, Fraction(9, 64))
    assert inv.c4**3 - inv.c6**2 == 243 == 1728 * inv.delta
    assert check_closed_forms(t)
    assert closed_forms(t)["delta"] == Fraction(9, 64)


def test_invariants_of_y2_x3_minus_x():
    E = WeierstrassModel.from_ainvs(make_field(-1), (0, 0, 0, -1, 0))
    inv = invariants(E)
    assert (inv.c4, inv.c6, inv.delta, inv.j) == (48, 0, 64, 1728)
    assert 48**3 == 1728 * 64


def test_appendix_small_triple():
    K = make_field(2)
    t = SolutionTriple.make("ppq3", K, -1, 1, 1, 5, d=2)
    assert t.satisfies_equation()
    assert check_closed_forms(t)
    a, b, d = t.a, t.b, t.d
    assert invariants(build_frey(t)).delta == 27 * d**3 * (a * b**3) ** 5


def test_general_requires_odd_coprime_coefficients():
    K = make_field(5)
    with pytest.raises(ValueError):
        build_frey(SolutionTriple.make("ppq2-general", K, 1, 1, 1, 3, A=2, B=-1, C=1))
    with pytest.raises(ValueError):
        build_frey(SolutionTriple.make("ppq2-general", K, 1, 1, 2, 3, A=3, B=9, C=3))


@pytest.mark.parametrize("sig", list(Signature))
def test_closed_forms_random(sig):
    rng = random.Random(hash(sig.value) & 0xFFFF)
    for _ in range(60):
        t = random_triple(rng, sig)
        assert check_closed_forms(t)
        inv = invariants(build_frey(t))
        assert inv.c4**3 - inv.c6**2 == 1728 * inv.delta
        assert 4 * inv.b8 == inv.b2 * inv.b6 - inv.b4**2


@given(st.integers(0, 2**32))
def test_discriminant_identity_property(seed):
    rng = random.Random(seed)
    t = random_triple(rng, rng.choice(list(Signature)))
    inv = invariants(build_frey(t))
    assert inv.c4**3 - inv.c6**2 == 1728 * inv.delta


# --- v(j) -------------------------------------------------------------------

def test_vj_examples():
    K = make_field(-3)
    # 2 | b exactly, d odd: a = 1, b = 2, p = 13, c = 1 + 2^12 u forces d
    (P,) = split_prime(K, 2)
    c = 1 + 2**12 * 3
    d = Fraction(c * c - 1, 2**13)
    t = SolutionTriple.make("ppq2-effective", K, 1, 2, c, 13, d=d)
    assert valuation(t.d, P) == 0
    assert vj_formula(t, P) == 12 - 26 == -14

    K = make_field(2)
    (P,) = split_prime(K, 2)
    b = K(0, 1)  # sqrt 2, v_P(b) = 1
    c = 1 + K(0, 1) ** 11 * 3  # v_P(c^2 - 1) = v_P(2) + 11 = 13
    d = (c * c - 1) / b**13
    t = SolutionTriple.make("ppq2-effective", K, 1, b, c, 13, d=d)
    assert valuation(2, P) == 2 and valuation(b, P) == 1
    assert vj_formula(t, P) == 24 - 26 == -2


def test_vj_requires_P_dividing_b():
    K = make_field(3)
    t = SolutionTriple.make("ppq2-effective", K, 1, 1, 2, 3, d=3)
    (P,) = split_prime(K, 2)
    with pytest.raises(ValueError):
        vj_formula(t, P)


@pytest.mark.parametrize("sig", [Signature.PPQ2_GENERAL, Signature.PPQ2_EFFECTIVE])
def test_vj_formula_random(sig):
    rng = random.Random(7)
    for _ in range(40):
        t = random_triple_2b(rng, sig)
        for P in split_prime(t.field, 2):
            v = vj_formula(t, P)
            assert v == 12 * valuation(2, P) - 2 * t.p * valuation(t.b, P)
            assert v == valuation(invariants(build_frey(t)).j, P)


def test_vj_lambda_random():
    rng = random.Random(8)
    for _ in range(40):
        t = random_triple_3b(rng)
        for P in split_prime(t.field, 3):
            assert vj_lambda_appendix(t, P) == 9 * valuation(3, P) - 3 * t.p * valuation(t.b, P)


def test_inertia_order_p():
    assert inertia_order_p_test(-14, 13)
    assert not inertia_order_p_test(-26, 13)
    assert not inertia_order_p_test(3, 13)


# --- local data -------------------------------------------------------------

def test_local_data_e1_at_ramified_three():
    K = make_field(3)
    t = SolutionTriple.make("ppq2-effective", K, 1, 2, 5, 3, d=3)
    (P,) = split_prime(K, 3)
    ld = local_data(t, build_frey(t), P)
    assert ld.reduction is Reduction.MULTIPLICATIVE and (ld.cond_exp_lo, ld.cond_exp_hi) == (1, 1)


def test_local_data_general_odd_prime_dividing_b():
    K = make_field(5)
    # 1 + 3^3 * ... : a = 2, b = 3, choose C so that the equation holds
    a, b, p = K(2), K(3), 3
    C = a**p + b**p  # 35
    t = SolutionTriple.make("ppq2-general", K, a, b, 1, p, A=1, B=1, C=C)
    E = build_frey(t)
    (P3,) = split_prime(K, 3)
    ld = local_data(t, E, P3)
    assert ld.reduction is Reduction.MULTIPLICATIVE and ld.cond_exp_hi == 1
    assert ld.v_c4 == 0 and ld.v_delta % p == 0
    P2 = split_prime(K, 2)[0]
    ld2 = local_data(t, E, P2)
    assert ld2.reduction is Reduction.ADDITIVE_BOUNDED and ld2.cond_exp_hi == 2 + 6 * valuation(2, P2)


def test_local_data_good_prime():
    K = make_field(3)
    t = SolutionTriple.make("ppq2-effective", K, 1, 2, 5, 3, d=3)
    P = split_prime(K, 7)[0]
    ld = local_data(t, build_frey(t), P)
    assert ld.reduction is Reduction.GOOD and ld.cond_exp_hi == 0


def test_local_data_potentially_multiplicative_needs_large_p():
    K = make_field(3)
    t = SolutionTriple.make("ppq2-effective", K, 1, 2, 5, 3, d=3)
    with pytest.raises(LemmaHypothesisError):
        local_data(t, build_frey(t), split_prime(K, 2)[0])


def test_multiplicative_primes_random():
    rng = random.Random(11)
    for _ in range(25):
        t = random_triple(rng, Signature.PPQ2_GENERAL, fields=(5, 13, -11))
        E = build_frey(t)
        inv = invariants(E)
        for q in (3, 5, 7, 11, 13):
            for P in split_prime(t.field, q):
                if valuation(t.C, P) or not t.a.is_integral() or not t.b.is_integral():
                    continue
                if valuation(t.A * t.B * t.a * t.b, P) > 0 and valuation(t.C * t.c, P) == 0 \
                        and valuation(t.A * t.a, P) * valuation(t.B * t.b, P) == 0:
                    try:
                        ld = local_data(t, E, P)
                    except LemmaHypothesisError:
                        continue
                    assert ld.v_c4 == 0 and valuation(inv.delta, P) > 0


# --- lambda / mu and the case analysis --------------------------------------

def test_lambda_mu():
    K = make_field(13)
    with pytest.raises(ValueError):
        lambda_mu(K(2), K(1))
    lam, mu = lambda_mu(K(1), K(1))
    assert (lam, mu) == (1, -3)
    assert lambda_of_model(curve_from_mu(mu)) == lam
    with pytest.raises(ValueError):
        curve_from_mu(K(-4))


@given(st.integers(-30, 30), st.integers(-30, 30), st.integers(1, 20))
def test_lambda_round_trip(x, y, den):
    K = make_field(13)
    mu = K(Fraction(x, den), y)
    if mu in (0, -4):
        return
    assert lambda_of_model(curve_from_mu(mu)) == mu + 4


def test_case_analysis_examples():
    K = make_field(13)
    (P,) = split_prime(K, 2)
    v = theoremA_case_analysis(K(8), P)
    assert v.applicable and v.case == 2 and v.contradiction
    assert v.v_j_direct == valuation(K(2**8 * 9**3) / 8, P)
    v = theoremA_case_analysis(K(3), P)
    assert v.case == 1 and v.contradiction
    v = theoremA_case_analysis(K(Fraction(1, 32)), P)
    assert not v.applicable


@pytest.mark.parametrize("m", [13, -3, 2, 5])
def test_case_analysis_range_always_contradicts(m):
    K = make_field(m)
    P = split_prime(K, 2)[0]
    v2 = valuation(2, P)
    g = P.gen
    for k in range(-4 * v2, 8 * v2 + 1):
        for unit in (K(1), K(3), K(-5), K(7, 2)):
            if valuation(unit, P):
                continue
            mu = unit * g**k
            if mu in (0, -1):
                continue
            verdict = theoremA_case_analysis(mu, P)
            assert verdict.applicable and verdict.contradiction
