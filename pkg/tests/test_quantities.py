"""Tests for the quantity-spec grammar: polynomials, ratios, atom parsing."""

from fractions import Fraction

import pytest

from padicmhs.quantities import (
    QuantitySpec,
    format_poly,
    format_quantity,
    parse_poly,
    parse_poly_ratio,
    parse_quantity,
    poly_eval,
)

F = Fraction


class TestParsePoly:
    def test_simple(self):
        assert parse_poly("p^2-1") == (F(-1), F(0), F(1))
        assert parse_poly("34") == (F(34),)
        assert parse_poly("p") == (F(0), F(1))
        assert parse_poly("2*p") == (F(0), F(2))
        assert parse_poly("-p^3+2*p") == (F(0), F(2), F(0), F(-1))

    def test_large(self):
        assert parse_poly("34*p^3-51*p^2+27*p-5") == (F(-5), F(27), F(-51), F(34))

    def test_rational_coefficients(self):
        assert parse_poly("1/2*p^2+p") == (F(0), F(1), F(1, 2))
        assert parse_poly("3/4") == (F(3, 4),)

    def test_integer_mode_rejects_rationals(self):
        with pytest.raises(ValueError):
            parse_poly("1/2*p", integer=True)
        assert parse_poly("2*p-1", integer=True) == (F(-1), F(2))

    def test_cancellation_and_zero(self):
        assert parse_poly("p-p") == ()
        assert parse_poly("0") == ()

    def test_whitespace(self):
        assert parse_poly(" p^2 - 1 ") == (F(-1), F(0), F(1))

    def test_repeated_terms_accumulate(self):
        assert parse_poly("p+p+1") == (F(1), F(2))

    def test_errors(self):
        for bad in ["", "p^-1", "p*", "*p", "p^", "q", "1+", "p^2^3"]:
            with pytest.raises(ValueError):
                parse_poly(bad)

    def test_implicit_product_leniency(self):
        # "2p" is accepted as 2*p
        assert parse_poly("2p") == (F(0), F(2))

    def test_poly_eval(self):
        f = parse_poly("p^2-1")
        assert poly_eval(f, 7) == 48
        assert poly_eval((), 5) == 0
        assert poly_eval(parse_poly("1/2*p^2+p"), 4) == 12


class TestPolyRatio:
    def test_plain_polynomial(self):
        num, den = parse_poly_ratio("p^2")
        assert num == (F(0), F(0), F(1))
        assert den == (F(1),)

    def test_paren_ratio(self):
        num, den = parse_poly_ratio("(2*p-1)/3")
        assert num == (F(-1), F(2))
        assert den == (F(3),)

    def test_one_over_poly(self):
        num, den = parse_poly_ratio("1/(1-p)")
        assert num == (F(1),)
        assert den == (F(1), F(-1))

    def test_both_parenthesized(self):
        num, den = parse_poly_ratio("(p^2-1)/(p+1)")
        assert num == (F(-1), F(0), F(1))
        assert den == (F(1), F(1))

    def test_multiple_slashes_rejected(self):
        with pytest.raises(ValueError):
            parse_poly_ratio("1/2/3")

    def test_zero_denominator_rejected(self):
        with pytest.raises(ValueError):
            parse_poly_ratio("p/(p-p)")


class TestFormatPoly:
    def test_round_trip(self):
        for text in ["p^2-1", "34*p^3-51*p^2+27*p-5", "2*p", "7", "-p^2+1", "0"]:
            coeffs = parse_poly(text)
            assert parse_poly(format_poly(coeffs)) == coeffs

    def test_examples(self):
        assert format_poly(parse_poly("p^2-1")) == "p^2-1"
        assert format_poly(()) == "0"
        assert format_poly(parse_poly("-p+2")) == "-p+2"


class TestParseQuantity:
    def test_binp_full_and_sugar(self):
        assert parse_quantity("binp", "2,1,1") == QuantitySpec("binp", (2, 1, 1))
        assert parse_quantity("binp", "2,1") == QuantitySpec("binp", (2, 1, 1))
        assert parse_quantity("binp", "3,1,2") == QuantitySpec("binp", (3, 1, 2))

    def test_binp_validation(self):
        with pytest.raises(ValueError):
            parse_quantity("binp", "1,2")  # a < b
        with pytest.raises(ValueError):
            parse_quantity("binp", "2,1,-1")
        with pytest.raises(ValueError):
            parse_quantity("binp", "2")

    def test_binpoly(self):
        q = parse_quantity("binpoly", "p^2;p")
        assert q.args == ((F(0), F(0), F(1)), (F(0), F(1)))

    def test_apery(self):
        assert parse_quantity("apery", "") == QuantitySpec("apery", ())
        with pytest.raises(ValueError):
            parse_quantity("apery", "3")

    def test_zetap(self):
        assert parse_quantity("zetap", "3").args == (3,)
        with pytest.raises(ValueError):
            parse_quantity("zetap", "1")

    def test_psum(self):
        q = parse_quantity("psum", "p^2-1;0;2,1")
        assert q.args == ((F(-1), F(0), F(1)), (), (2, 1), False)
        q = parse_quantity("psum", "p^2;0;1;restricted")
        assert q.args[3] is True
        q = parse_quantity("psum", "p;0;-2,1")
        assert q.args[2] == (-2, 1)

    def test_hres_curious(self):
        assert parse_quantity("hres", "2").args == (2,)
        assert parse_quantity("curious", "3,3").args == (3, 3)
        with pytest.raises(ValueError):
            parse_quantity("curious", "0,3")

    def test_sumpoly(self):
        q = parse_quantity("sumpoly", "1;1,1")
        assert q.args == ((F(1),), (1, 1))
        q = parse_quantity("sumpoly", "p^2;2")
        assert q.args == ((F(0), F(0), F(1)), (2,))
        with pytest.raises(ValueError):
            parse_quantity("sumpoly", "1;0,1")

    def test_half_alt(self):
        assert parse_quantity("half", "2").args == (2,)
        assert parse_quantity("alt", "3").args == (3,)
        with pytest.raises(ValueError):
            parse_quantity("half", "1")

    def test_rat(self):
        q = parse_quantity("rat", "(2*p-1)/3")
        assert q.args == ((F(-1), F(2)), (F(3),))

    def test_unknown(self):
        with pytest.raises(ValueError):
            parse_quantity("zeta", "3")

    def test_format_round_trip(self):
        samples = [
            ("binp", "2,1,1"),
            ("binpoly", "p^2;p"),
            ("apery", ""),
            ("zetap", "3"),
            ("psum", "p^2-1;0;2,1"),
            ("psum", "p^2;0;1;restricted"),
            ("hres", "2"),
            ("curious", "3,3"),
            ("sumpoly", "1/2*p^2+p;1,1"),
            ("half", "2"),
            ("alt", "2"),
            ("rat", "(2*p-1)/3"),
            ("rat", "p^2"),
        ]
        for name, inner in samples:
            q = parse_quantity(name, inner)
            text = format_quantity(q)
            name2, inner2 = text.split("(", 1)
            assert parse_quantity(name2, inner2[:-1]) == q
