"""Tests for the numeric oracle: exact evaluators, pinned values, invariants,
and valuation reports.  Reference values come from independent brute-force
summation, never from the code under test."""

import math
from fractions import Fraction
from itertools import combinations, product

import pytest

from padicmhs.arith import INFINITY, padic_valuation
from padicmhs.compositions import enumerate_compositions, stuffle
from padicmhs.oracle import (
    NumericReport,
    PrimeWindow,
    WorkBudgetExceeded,
    apery_number,
    check_numeric,
    eval_mhs,
    eval_polylog_sum,
    eval_power_sum,
    eval_quantity,
    eval_series_terms,
    primes_in,
)
from padicmhs.quantities import parse_quantity
from padicmhs.series import CongruenceStatement, MhsSeries

F = Fraction


def mhs_brute(N, s):
    """Independent brute-force H_N(s) over descending index tuples."""
    k = len(s)
    total = F(0)
    for tup in combinations(range(1, N + 1), k):
        desc = tup[::-1]
        term = F(1)
        for n, e in zip(desc, s):
            term *= F(1, n**e)
        total += term
    return total


class TestPrimes:
    def test_primes_in(self):
        assert primes_in(11, 31) == [11, 13, 17, 19, 23, 29, 31]
        assert primes_in(2, 10) == [2, 3, 5, 7]
        assert primes_in(90, 96) == []

    def test_window_defaults(self):
        w = PrimeWindow()
        assert w.lo == 11 and w.hi == 97
        ps = w.primes()
        assert ps[0] == 11 and ps[-1] == 97 and len(ps) == 21


class TestEvalMhs:
    def test_pinned_values(self):
        assert eval_mhs(4, (1,)) == F(25, 12)
        assert eval_mhs(4, (2, 1)) == F(17, 32)
        assert eval_mhs(0, (1,)) == 0
        assert eval_mhs(0, (2, 1)) == 0
        assert eval_mhs(5, ()) == 1

    def test_short_chains_vanish(self):
        assert eval_mhs(2, (1, 1, 1)) == 0
        assert eval_mhs(3, (1, 1, 1)) == F(1, 6)

    def test_matches_brute_force(self):
        for s in [(1,), (2,), (1, 1), (3, 1), (2, 1, 1), (1, 2)]:
            for N in [1, 3, 7, 10]:
                assert eval_mhs(N, s) == mhs_brute(N, s)

    def test_stuffle_law_exhaustive(self):
        """H_N(s) * H_N(t) = sum of stuffle-expanded H_N(u), weights <= 5, N <= 25."""
        comps = [c for c in enumerate_compositions(5) if c]
        pairs = [
            (s, t)
            for s in comps
            for t in comps
            if sum(s) + sum(t) <= 5 and s <= t
        ]
        assert len(pairs) > 20
        for N in [1, 2, 3, 5, 8, 13, 25]:
            for s, t in pairs:
                lhs = eval_mhs(N, s) * eval_mhs(N, t)
                rhs = sum(
                    (mult * eval_mhs(N, u) for u, mult in stuffle(s, t).items()),
                    F(0),
                )
                assert lhs == rhs, (N, s, t)

    def test_reversal_congruence(self):
        """v_p(H_{p-1}(s) - (-1)^{|s|} H_{p-1}(reversed s)) >= 1, weight <= 4."""
        comps = [c for c in enumerate_compositions(4) if c]
        for p in PrimeWindow().primes():
            for s in comps:
                diff = eval_mhs(p - 1, s) - F(-1) ** sum(s) * eval_mhs(p - 1, s[::-1])
                assert padic_valuation(diff, p) >= 1, (p, s)


class TestEvalPowerSum:
    def test_pinned(self):
        assert eval_power_sum(4, 2, (1,)) == F(7, 12)  # 1/3 + 1/4
        assert eval_power_sum(9, 0, (1,), restricted_at=3) == sum(
            (F(1, n) for n in range(1, 10) if n % 3), F(0)
        )

    def test_matches_mhs_when_unrestricted_from_zero(self):
        for s in [(1,), (2, 1), (1, 1, 1)]:
            for N in [0, 1, 4, 9]:
                assert eval_power_sum(N, 0, s) == eval_mhs(N, s)

    def test_negative_exponents(self):
        assert eval_power_sum(3, 0, (-2,)) == 1 + 4 + 9
        assert eval_power_sum(3, 0, (-1, 1)) == F(3, 1) + F(2, 1) + F(3, 2)
        # n1 > n2: (2,1): 2/1; (3,1): 3/1; (3,2): 3/2

    def test_empty_exponents(self):
        assert eval_power_sum(5, 2, ()) == 1

    def test_empty_range(self):
        assert eval_power_sum(3, 3, (1,)) == 0

    def test_bad_bounds(self):
        with pytest.raises(ValueError):
            eval_power_sum(2, 3, (1,))

    def test_brute_force_cross_check(self):
        # S_{N,M}(s): descending chains in [M+1, N]
        def brute(N, M, s, p=None):
            total = F(0)
            pool = [n for n in range(M + 1, N + 1) if p is None or n % p]
            for tup in combinations(pool, len(s)):
                term = F(1)
                for n, e in zip(tup[::-1], s):
                    term *= F(n) ** (-e)
                total += term
            return total

        for N, M, s in [(8, 3, (1,)), (8, 3, (2, 1)), (10, 0, (-1, 2)), (6, 1, (1, 1))]:
            assert eval_power_sum(N, M, s) == brute(N, M, s)
            assert eval_power_sum(N, M, s, restricted_at=3) == brute(N, M, s, 3)


class TestEvalPolylogSum:
    def test_all_z_one_matches_mhs(self):
        for s in [(1,), (2, 1)]:
            for N in [3, 6]:
                assert eval_polylog_sum(N, s, (1,) * len(s)) == eval_mhs(N, s)

    def test_alternating_pinned(self):
        # at p=5: -1 + 1/2 - 1/3 + 1/4
        assert eval_polylog_sum(4, (1,), (-1,)) == F(-7, 12)

    def test_eq2_two_power(self):
        # 2^p = 2 - p * sum (-1)^n/n mod p^2 at p = 7
        p = 7
        val = 2**p - (2 - p * eval_polylog_sum(p - 1, (1,), (-1,)))
        assert padic_valuation(F(val), p) >= 2

    def test_two_power_truncations(self):
        """2^p - 2 - sum_{k<K} (-1)^{k+1} p^{k+1} H((1,1^k);(-1,1^k)) has v_p >= K+1."""
        for p in PrimeWindow().primes():
            for K in (0, 1, 2):
                acc = F(2**p - 2)
                for k in range(K):
                    exps = (1,) * (k + 1)
                    zs = (-1,) + (1,) * k
                    acc -= F(-1) ** (k + 1) * F(p) ** (k + 1) * eval_polylog_sum(
                        p - 1, exps, zs
                    )
                assert padic_valuation(acc, p) >= K + 1, (p, K)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            eval_polylog_sum(4, (1, 2), (1,))

    def test_rational_z(self):
        assert eval_polylog_sum(2, (1,), (F(1, 2),)) == F(1, 2) + F(1, 8)


class TestApery:
    def test_small_values(self):
        assert apery_number(0) == 1
        assert apery_number(1) == 5
        assert apery_number(2) == 73
        assert apery_number(4) == 33001

    def test_recurrence(self):
        # n^3 b_n = (34n^3 - 51n^2 + 27n - 5) b_{n-1} - (n-1)^3 b_{n-2}
        b = [apery_number(n) for n in range(31)]
        for n in range(2, 31):
            lhs = F(n**3) * b[n]
            rhs = F(34 * n**3 - 51 * n**2 + 27 * n - 5) * b[n - 1] - F(
                (n - 1) ** 3
            ) * b[n - 2]
            assert lhs == rhs, n


class TestEvalQuantity:
    def test_binp(self):
        q = parse_quantity("binp", "2,1,1")
        assert eval_quantity(q, 7) == math.comb(14, 7) == 3432
        assert eval_quantity(parse_quantity("binp", "3,1"), 5) == math.comb(15, 5)
        assert eval_quantity(parse_quantity("binp", "2,1,2"), 3) == math.comb(18, 9)

    def test_binpoly(self):
        q = parse_quantity("binpoly", "p^2;p")
        assert eval_quantity(q, 5) == math.comb(25, 5)
        q = parse_quantity("binpoly", "2*p;p")
        assert eval_quantity(q, 7) == math.comb(14, 7)

    def test_apery(self):
        q = parse_quantity("apery", "")
        assert eval_quantity(q, 5) == apery_number(4) == 33001

    def test_zetap_refuses(self):
        with pytest.raises(ValueError, match="p-adic"):
            eval_quantity(parse_quantity("zetap", "3"), 7)

    def test_psum(self):
        q = parse_quantity("psum", "p^2-1;0;2,1")
        assert eval_quantity(q, 5) == eval_power_sum(24, 0, (2, 1))
        q = parse_quantity("psum", "p^2;0;1;restricted")
        assert eval_quantity(q, 5) == eval_power_sum(25, 0, (1,), restricted_at=5)
        q = parse_quantity("psum", "2*p;p;1")
        assert eval_quantity(q, 7) == eval_power_sum(14, 7, (1,))

    def test_hres(self):
        q = parse_quantity("hres", "2")
        expected = sum((F(1, n) for n in range(1, 25) if n % 5), F(0))
        assert eval_quantity(q, 5) == expected
        assert eval_quantity(parse_quantity("hres", "1"), 7) == eval_mhs(6, (1,))

    def test_sumpoly(self):
        q = parse_quantity("sumpoly", "1;1")
        # sum_{m=1}^{4} H_m(1) = 1 + 3/2 + 11/6 + 25/12
        assert eval_quantity(q, 5) == F(1) + F(3, 2) + F(11, 6) + F(25, 12)
        q = parse_quantity("sumpoly", "p^2;2,1")
        expected = sum((F(m**2) * eval_mhs(m, (2, 1)) for m in range(1, 7)), F(0))
        assert eval_quantity(q, 7) == expected

    def test_half_alt(self):
        assert eval_quantity(parse_quantity("half", "2"), 5) == F(25) * (1 + F(1, 4))
        expected = F(125) * sum((F(-1) ** n / F(n) ** 3 for n in range(1, 5)), F(0))
        assert eval_quantity(parse_quantity("alt", "3"), 5) == expected

    def test_rat(self):
        assert eval_quantity(parse_quantity("rat", "p^2"), 7) == 49
        assert eval_quantity(parse_quantity("rat", "(2*p-1)/3"), 5) == 3
        assert eval_quantity(parse_quantity("rat", "1/(1-p)"), 3) == F(-1, 2)

    def test_rat_zero_denominator(self):
        with pytest.raises(ZeroDivisionError):
            eval_quantity(parse_quantity("rat", "1/(p-3)"), 3)


class TestCurious:
    @staticmethod
    def brute(r, k, p):
        """Direct sum over compositions of p^r into k coprime-to-p parts."""
        target = p**r
        total = F(0)
        # compositions via stars and bars on cut points
        for cuts in combinations(range(1, target), k - 1):
            parts = []
            prev = 0
            for c in cuts + (target,):
                parts.append(c - prev)
                prev = c
            if all(part % p for part in parts):
                term = F(1)
                for part in parts:
                    term *= F(1, part)
                total += term
        return total

    def test_k_one_is_empty_sum(self):
        for r in (1, 2, 3):
            assert eval_quantity(parse_quantity("curious", f"{r},1"), 5) == 0

    def test_pinned_value(self):
        assert eval_quantity(parse_quantity("curious", "1,2"), 5) == F(5, 6)

    def test_brute_force_cross_check(self):
        cases = [(1, 2, 3), (1, 2, 5), (1, 3, 5), (1, 4, 5), (2, 2, 3), (2, 3, 3), (1, 3, 7), (2, 2, 5)]
        for r, k, p in cases:
            q = parse_quantity("curious", f"{r},{k}")
            assert eval_quantity(q, p) == self.brute(r, k, p), (r, k, p)

    def test_depth_identity_r_one(self):
        # C_{1,k,p} = k!/p * H_{p-1}(1,...,1) with k-1 ones
        for k in (2, 3, 4):
            for p in (5, 7, 11):
                q = parse_quantity("curious", f"1,{k}")
                expected = F(math.factorial(k), p) * eval_mhs(p - 1, (1,) * (k - 1))
                assert eval_quantity(q, p) == expected, (k, p)

    def test_work_budget_refusal(self):
        q = parse_quantity("curious", "3,3")
        with pytest.raises(WorkBudgetExceeded):
            eval_quantity(q, 11, work_budget=100)


class TestEvalSeriesTerms:
    def test_basic(self):
        s = MhsSeries({(0, ()): 2, (1, (1,)): 2}, 3)
        assert eval_series_terms(s, 5) == 2 + 10 * F(25, 12)

    def test_negative_exponent(self):
        s = MhsSeries({(-1, (1,)): 1})
        assert eval_series_terms(s, 5) == F(25, 12) / 5

    def test_empty(self):
        assert eval_series_terms(MhsSeries.zero(4), 7) == 0


class TestCheckNumeric:
    def test_known_binomial_congruence(self):
        """12 - 9*C(2p,p) + 2*C(3p,p) = 24 p^3 H_{p-1}(3) mod p^6 for p >= 7."""

        def diff(p):
            return (
                12
                - 9 * math.comb(2 * p, p)
                + 2 * math.comb(3 * p, p)
                - 24 * F(p) ** 3 * eval_mhs(p - 1, (3,))
            )

        report = check_numeric(diff, PrimeWindow(7, 97), required=6)
        assert report.passed
        assert len(report.records) == 22

    def test_wolstenholme_statement(self):
        stmt = CongruenceStatement(
            MhsSeries({(1, (1,)): 1, (2, (1, 1)): 1}, 3), 3
        )
        report = check_numeric(stmt, PrimeWindow(5, 97))
        assert report.passed

    def test_negative_control_fails_everywhere(self):
        def diff(p):
            return (
                12
                - 9 * math.comb(2 * p, p)
                + 2 * math.comb(3 * p, p)
                - 25 * F(p) ** 3 * eval_mhs(p - 1, (3,))
            )

        report = check_numeric(diff, PrimeWindow(7, 97), required=6)
        assert not report.passed
        # sporadic per-prime passes are possible for a false statement; the
        # overwhelming majority must fail
        failures = sum(1 for (_p, _req, got) in report.records if got < 6)
        assert failures >= 0.9 * len(report.records)

    def test_quantity_series_pair_exact(self):
        q = parse_quantity("rat", "(2*p-1)/3")
        series = MhsSeries({(0, ()): F(-1, 3), (1, ()): F(2, 3)})
        report = check_numeric((q, series), PrimeWindow(11, 31))
        assert report.passed
        assert all(got is INFINITY for (_p, _req, got) in report.records)

    def test_quantity_series_pair_truncated(self):
        # C(2p,p) = 2 + 2pH(1) + 2p^2 H(1,1) + O(p^3)
        q = parse_quantity("binp", "2,1,1")
        series = MhsSeries(
            {(0, ()): 2, (1, (1,)): 2, (2, (1, 1)): 2}, 3
        )
        report = check_numeric((q, series), PrimeWindow(11, 61))
        assert report.passed

    def test_denominator_primes_skipped(self):
        stmt = CongruenceStatement(MhsSeries({(1, (1,)): F(1, 11)}, 2), 1)
        report = check_numeric(stmt, PrimeWindow(11, 31))
        assert 11 in report.skipped
        assert all(p != 11 for (p, _r, _g) in report.records)

    def test_refusal_recorded(self):
        q = parse_quantity("curious", "3,3")
        series = MhsSeries.zero(1)
        report = check_numeric((q, series), PrimeWindow(11, 13), work_budget=10)
        assert not report.passed
        assert report.refused == [11, 13]
        assert all("REFUSED" in line for line in report.machine_lines())

    def test_machine_line_format(self):
        stmt = CongruenceStatement(
            MhsSeries({(1, (1,)): 1, (2, (1, 1)): 1}, 3), 3
        )
        report = check_numeric(stmt, PrimeWindow(11, 13))
        lines = report.machine_lines()
        assert len(lines) == 2
        assert lines[0].startswith("p=11 req=3 got=")
        assert lines[0].endswith("PASS")

    def test_render_table(self):
        stmt = CongruenceStatement(MhsSeries({(1, (1,)): 1}, 2), 2)
        text = check_numeric(stmt, PrimeWindow(11, 13)).render()
        assert "prime" in text and "required" in text and "verdict" in text
        assert "summary: PASS" in text

    def test_callable_requires_required(self):
        with pytest.raises(ValueError):
            check_numeric(lambda p: F(0), PrimeWindow(11, 13))

    def test_empty_window_fails(self):
        report = check_numeric(lambda p: F(0), PrimeWindow(90, 96), required=1)
        assert not report.passed
