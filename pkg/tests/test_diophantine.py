import math
import warnings
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from moebius_expsum import (ExplicitCF, InsufficientTermsError, PrecisionError,
                            PrescribedExponent, QuadraticSurd, SelectionError)
from moebius_expsum.diophantine import (GOLDEN, alpha_fixed_point, cf_terms, check_qgrowth,
                                        convergents, default_eta, default_tau, q_range_holds,
                                        estimate_eta, extend_convergents, format_alpha,
                                        parse_alpha, parse_rational, select_q,
                                        verify_convergent_errors)


def test_sqrt2_and_golden_terms():
    assert cf_terms(parse_alpha("quad:2"), 6) == [1, 2, 2, 2, 2, 2]
    assert cf_terms(GOLDEN, 5) == [1, 1, 1, 1, 1]
    assert cf_terms(parse_alpha("quad:7"), 9) == [2, 1, 1, 1, 4, 1, 1, 1, 4]


def test_sqrt2_convergents():
    cs = convergents(parse_alpha("quad:2"), 5)
    assert [(int(c.p), int(c.q)) for c in cs] == [(1, 1), (3, 2), (7, 5), (17, 12), (41, 29)]


@pytest.mark.parametrize("P,D,Q", [(1, 5, 2), (0, 2, 1), (3, 7, 2), (-1, 3, 5), (2, 11, -3),
                                   (5, 13, 7)])
def test_surd_terms_against_mpmath(P, D, Q):
    mpmath.mp.dps = 80
    v = (P + mpmath.sqrt(D)) / Q
    expected = []
    for _ in range(25):
        a = int(mpmath.floor(v))
        expected.append(a)
        v = 1 / (v - a)
    assert cf_terms(QuadraticSurd(P, D, Q), 25) == expected


def test_determinant_identity_small():
    for spec in (parse_alpha("quad:3"), GOLDEN, PrescribedExponent(3)):
        cs = convergents(spec, 12)
        for i in range(1, 12):
            assert cs[i].p * cs[i - 1].q - cs[i - 1].p * cs[i].q == (-1) ** (i - 1)


def test_prescribed_exponent_rule():
    spec = PrescribedExponent(3)
    terms = cf_terms(spec, 7)
    cs = convergents(spec, 7)
    # a_{i+1} = max(1, ceil(q_i^(eta-2)))
    for i in range(6):
        assert terms[i + 1] == max(1, int(cs[i].q))
    half = PrescribedExponent(Fraction(5, 2))
    cs = convergents(half, 8)
    terms = cf_terms(half, 8)
    for i in range(7):
        assert terms[i + 1] == max(1, math.isqrt(int(cs[i].q) - 1) + 1 if cs[i].q > 1 else 1)


def test_extend_convergents_continues_recurrence():
    spec = PrescribedExponent(Fraction(5, 2))
    assert extend_convergents(spec, convergents(spec, 8), 3) == convergents(spec, 11)
    assert extend_convergents(GOLDEN, convergents(GOLDEN, 4), 2) == convergents(GOLDEN, 6)


def test_finite_expansion():
    spec = parse_alpha("cf:0,3,1,4")
    assert cf_terms(spec, 4) == [0, 3, 1, 4]
    with pytest.raises(InsufficientTermsError):
        convergents(spec, 5)
    with pytest.raises(PrecisionError):
        alpha_fixed_point(spec)


@pytest.mark.parametrize("text", ["quad:2", "quad:1,5,2", "cf:1,2,3", "liouville:5/2",
                                  "liouville:3", "quad:-1,3,5"])
def test_alpha_text_roundtrip(text):
    spec = parse_alpha(text)
    assert format_alpha(spec) == text
    assert parse_alpha(format_alpha(spec)) == spec


def test_golden_alias():
    assert parse_alpha("golden") == GOLDEN
    assert format_alpha(GOLDEN) == "quad:1,5,2"


@pytest.mark.parametrize("bad", ["quad:4", "quad:0", "quad:1,5,0", "liouville:2", "liouville:3/0",
                                 "cf:1,0,2", "sqrt2", "quad:", "zeta:3"])
def test_invalid_alpha(bad):
    with pytest.raises(ValueError):
        parse_alpha(bad)


def test_parse_rational():
    assert parse_rational("21/10") == Fraction(21, 10)
    assert parse_rational("3") == 3
    for bad in ["1.5", "-2", "a/b", "1/0"]:
        with pytest.raises(ValueError):
            parse_rational(bad)


@pytest.mark.parametrize("text,D", [("quad:2", 2), ("golden", 5)])
def test_fixed_point_value(text, D):
    mpmath.mp.dps = 100
    ref = (mpmath.sqrt(D) - 1) / 2 if text == "golden" else mpmath.sqrt(D) - 1
    a = alpha_fixed_point(parse_alpha(text), 256)
    assert abs(mpmath.mpf(a.value) / mpmath.mpf(2) ** 256 - ref) < mpmath.mpf(2) ** -255
    hi, lo = a.words
    assert (hi << 64 | lo) == a.value >> 128
    assert a.kernel_bits == 128


def test_fixed_point_consistent_across_precisions():
    spec = parse_alpha("quad:3")
    a = alpha_fixed_point(spec, 512)
    b = alpha_fixed_point(spec, 256)
    assert abs((a.value >> 256) - b.value) <= 1


@given(st.integers(2, 40), st.integers(0, 30))
def test_fixed_point_negated(D, _):
    if math.isqrt(D) ** 2 == D:
        return
    a = alpha_fixed_point(QuadraticSurd(0, D), 128)
    assert (a.value + a.negated().value) % (1 << 128) == 0


def test_estimate_eta_known_cases():
    assert estimate_eta(convergents(parse_alpha("quad:2"), 30)) == pytest.approx(2.0, abs=0.05)
    assert estimate_eta(convergents(PrescribedExponent(4), 12)) == pytest.approx(4.0, abs=0.15)
    with pytest.raises(ValueError):
        estimate_eta(convergents(GOLDEN, 3))


def test_default_eta_and_tau():
    assert default_eta(GOLDEN) == 2
    assert default_eta(PrescribedExponent(3)) == 3
    assert default_eta(ExplicitCF(1, (2, 3))) is None
    assert default_tau(2) == Fraction(5, 2)
    assert default_tau(3) == Fraction(31, 10)
    assert default_tau(Fraction(5, 2)) == Fraction(13, 5)


def test_qgrowth_golden():
    cs = convergents(GOLDEN, 20)
    flags = check_qgrowth(cs, Fraction(5, 2))
    # q_1 = q_2 = 1 and q_3 = 2, 3 are too small for q_{i+1} < q_i^{3/2}
    assert flags[:3] == [False, False, False]
    assert all(flags[3:])


def test_qgrowth_fails_for_large_exponent():
    cs = convergents(PrescribedExponent(4), 10)
    flags = check_qgrowth(cs, Fraction(5, 2))
    assert not any(flags[3:])
    assert all(check_qgrowth(cs, 5)[3:])


def test_select_q_golden_reference():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        sel = select_q(GOLDEN, 10**6, Fraction(21, 10))
    assert sel.q == 987 and sel.q_prev == 610
    assert sel.xrange_ok
    assert q_range_holds(10**6, sel.q, Fraction(21, 10)) == (True, True)


@given(st.integers(100, 10**12))
def test_select_q_brackets_x(x):
    tau = Fraction(5, 2)
    sel = select_q(parse_alpha("quad:2"), x, tau)
    # q_{i-1} <= x^(1/tau) < q_i
    assert sel.q_prev**5 <= x**2 < sel.q**5


def test_select_q_errors():
    with pytest.raises(ValueError):
        select_q(GOLDEN, 10**6, 2)
    with pytest.raises(SelectionError):
        select_q(parse_alpha("cf:0,2,3"), 10**9, 3)


def test_verify_errors_escalates():
    spec = PrescribedExponent(Fraction(5, 2))
    res = verify_convergent_errors(spec, convergents(spec, 18))
    assert all(r is True for r, _ in res)
    assert any(bits > 256 for _, bits in res)
