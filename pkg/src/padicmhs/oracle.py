"""Independent numeric verification at concrete primes.

Everything here computes exact rational values by *direct* summation or
binomial arithmetic — never through the symbolic series expansions that it
is used to check.  ``check_numeric`` evaluates a claimed congruence or
expansion at every prime of a window and reports the achieved p-adic
valuations against the required one.

Work on potentially huge direct sums (the "curious" compositional sums,
power sums with p^r-sized bounds) is metered by an explicit budget; when a
single evaluation would exceed it, the oracle refuses loudly instead of
silently skipping.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Union

from .arith import INFINITY, binomial, padic_valuation
from .compositions import Comp
from .quantities import QuantitySpec, poly_eval
from .series import CongruenceStatement, MhsSeries

__all__ = [
    "DEFAULT_WORK_BUDGET",
    "WorkBudgetExceeded",
    "PrimeWindow",
    "NumericReport",
    "primes_in",
    "eval_mhs",
    "eval_power_sum",
    "eval_polylog_sum",
    "eval_quantity",
    "eval_series_terms",
    "apery_number",
    "check_numeric",
]

DEFAULT_WORK_BUDGET = 10**8


class WorkBudgetExceeded(Exception):
    """An exact evaluation would exceed the configured work budget."""


# ---------------------------------------------------------------------------
# primes
# ---------------------------------------------------------------------------


def primes_in(lo: int, hi: int) -> list[int]:
    """All primes in [lo, hi] (inclusive)."""
    out = []
    for n in range(max(lo, 2), hi + 1):
        if all(n % q for q in range(2, math.isqrt(n) + 1)):
            out.append(n)
    return out


class PrimeWindow:
    """An inclusive range of primes used for spot checks (default 11..97)."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: int = 11, hi: int = 97) -> None:
        self.lo = lo
        self.hi = hi

    def primes(self) -> list[int]:
        return primes_in(self.lo, self.hi)

    def __iter__(self):
        return iter(self.primes())

    def __repr__(self) -> str:
        return f"PrimeWindow({self.lo}..{self.hi})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PrimeWindow):
            return NotImplemented
        return (self.lo, self.hi) == (other.lo, other.hi)


# ---------------------------------------------------------------------------
# exact evaluators
# ---------------------------------------------------------------------------


@lru_cache(maxsize=4096)
def eval_mhs(N: int, s: Comp) -> Fraction:
    """H_N(s) = sum over N >= n_1 > ... > n_k >= 1 of prod n_i^(-s_i).

    Dynamic program over prefixes, O(N * depth) exact-rational operations.
    """
    k = len(s)
    if k == 0:
        return Fraction(1)
    if N < k:
        return Fraction(0)
    D = [Fraction(1)] + [Fraction(0)] * k
    for n in range(1, N + 1):
        for j in range(min(k, n), 0, -1):
            D[j] += D[j - 1] * Fraction(1, n ** s[k - j])
    return D[k]


def eval_power_sum(
    N: int, M: int, exps: tuple[int, ...], restricted_at: int | None = None
) -> Fraction:
    """S_{N,M}(exps): sum over N >= n_1 > ... > n_k >= M+1 of prod n_i^(-e_i).

    Exponents may be arbitrary integers.  With ``restricted_at=p``, indices
    divisible by p are skipped (the S^{(p)} variant).
    """
    if not (N >= M >= 0):
        raise ValueError(f"eval_power_sum requires N >= M >= 0, got N={N}, M={M}")
    k = len(exps)
    if k == 0:
        return Fraction(1)
    D = [Fraction(1)] + [Fraction(0)] * k
    for n in range(M + 1, N + 1):
        if restricted_at is not None and n % restricted_at == 0:
            continue
        for j in range(k, 0, -1):
            if D[j - 1]:
                D[j] += D[j - 1] * Fraction(n) ** (-exps[k - j])
    return D[k]


def eval_polylog_sum(
    N: int, exps: tuple[int, ...], zs: tuple[Union[int, Fraction], ...]
) -> Fraction:
    """sum over N >= n_1 > ... > n_k >= 1 of prod z_i^(n_i) / n_i^(s_i)."""
    if len(exps) != len(zs):
        raise ValueError("eval_polylog_sum: exps and zs must have equal length")
    k = len(exps)
    if k == 0:
        return Fraction(1)
    zs = tuple(Fraction(z) for z in zs)
    D = [Fraction(1)] + [Fraction(0)] * k
    zpow = [Fraction(1)] * k  # zpow[i] = zs[i] ** n, updated per n
    for n in range(1, N + 1):
        for i in range(k):
            zpow[i] *= zs[i]
        for j in range(min(k, n), 0, -1):
            if D[j - 1]:
                i = k - j
                D[j] += D[j - 1] * zpow[i] * Fraction(1, n ** exps[i])
    return D[k]


def apery_number(n: int) -> int:
    """b_n = sum_k C(n,k)^2 * C(n+k,k)^2, computed directly."""
    return sum(math.comb(n, k) ** 2 * math.comb(n + k, k) ** 2 for k in range(n + 1))


def _as_int(x: Fraction, what: str) -> int:
    if x.denominator != 1:
        raise ValueError(f"{what} must evaluate to an integer, got {x}")
    return x.numerator


def eval_quantity(
    q: QuantitySpec, p: int, work_budget: int = DEFAULT_WORK_BUDGET
) -> Fraction:
    """Exact value of a named quantity at the prime p, by direct computation.

    Never routes through the symbolic series expansions it is used to
    verify.  Raises :class:`WorkBudgetExceeded` when the direct computation
    would exceed ``work_budget`` elementary summation steps, and
    ``ValueError`` for quantities with no single-prime rational value
    (``zetap``).
    """
    name, args = q.name, q.args
    if name == "binp":
        a, b, r = args
        return Fraction(math.comb(a * p**r, b * p**r))
    if name == "binpoly":
        f, g = args
        fn = _as_int(poly_eval(f, p), "binpoly numerator polynomial")
        gn = _as_int(poly_eval(g, p), "binpoly denominator polynomial")
        return binomial(fn, gn)
    if name == "apery":
        return Fraction(apery_number(p - 1))
    if name == "zetap":
        raise ValueError(
            "zetap(k) is a p-adic limit with no exact rational value at a "
            "single prime; verify congruences involving it at the level of "
            "their fully expanded series instead"
        )
    if name == "psum":
        f, g, exps, restricted = args
        N = _as_int(poly_eval(f, p), "psum upper bound")
        M = _as_int(poly_eval(g, p), "psum lower bound")
        _charge((N - M) * max(1, len(exps)), work_budget, q)
        return eval_power_sum(N, M, exps, restricted_at=p if restricted else None)
    if name == "hres":
        (r,) = args
        N = p**r - 1
        _charge(N, work_budget, q)
        return eval_power_sum(N, 0, (1,), restricted_at=p)
    if name == "curious":
        r, k = args
        return _eval_curious(r, k, p, work_budget)
    if name == "sumpoly":
        P, s = args
        return _eval_sumpoly(P, s, p)
    if name == "half":
        (k,) = args
        return Fraction(p) ** k * eval_mhs((p - 1) // 2, (k,))
    if name == "alt":
        (k,) = args
        return Fraction(p) ** k * eval_polylog_sum(p - 1, (k,), (Fraction(-1),))
    if name == "rat":
        num, den = args
        d = poly_eval(den, p)
        if d == 0:
            raise ZeroDivisionError(f"rat denominator vanishes at p={p}")
        return poly_eval(num, p) / d
    raise ValueError(f"unknown quantity {name!r}")


def _charge(cost: int, budget: int, q: QuantitySpec) -> None:
    if cost > budget:
        raise WorkBudgetExceeded(
            f"evaluating {q} needs ~{cost} summation steps, over the budget of {budget}"
        )


def _eval_sumpoly(P: tuple[Fraction, ...], s: Comp, p: int) -> Fraction:
    """sum_{m=1}^{p-1} P(m) * H_m(s), sharing one MHS dynamic program."""
    k = len(s)
    D = [Fraction(1)] + [Fraction(0)] * k
    total = Fraction(0)
    for m in range(1, p):
        for j in range(min(k, m), 0, -1):
            D[j] += D[j - 1] * Fraction(1, m ** s[k - j])
        total += poly_eval(P, m) * D[k]
    return total


def _eval_curious(r: int, k: int, p: int, budget: int) -> Fraction:
    """C_{r,k,p} = sum of 1/(n_1*...*n_k) over n_1+...+n_k = p^r, p | no n_i.

    Evaluated through the symmetrized chain form: with m_i the suffix sums,
    the sum equals k! / p^r times

        D = sum over p^r > l_1 > ... > l_{k-1} >= 1 of prod 1/l_i,

    subject to p not dividing l_1 or l_{k-1} and no two *consecutive* l's
    congruent mod p.  D is computed by an ascending dynamic program with
    per-residue prefix sums, O(k * p^r) exact operations.  To avoid
    per-step rational reduction, the program runs on integers over the
    running common denominator S = lcm(1..n): a level-j state (a sum of
    products of j..L reciprocals) is stored times S^(L+1-j), and all
    states are rescaled whenever S grows.  One exact division at the end
    recovers the rational value.

    For k = 1 the only composition is (p^r) itself, which the coprimality
    constraint excludes, so the sum is empty and the value is 0.
    """
    if k == 1:
        return Fraction(0)
    L = k - 1
    top = p**r
    _charge(L * (top - 1), budget, QuantitySpec("curious", (r, k)))
    # tot[j] = sum of T_j(m) over m < n; res[j][c] = same, restricted to m = c mod p,
    # where T_j(n) sums the level-j..L chain tails with l_j = n.
    S = 1
    tot = [0] * (L + 1)
    res = [[0] * p for _ in range(L + 1)]
    total = 0  # scaled by S^L
    for n in range(1, top):
        f = n // math.gcd(S, n)
        if f > 1:  # n is a prime power; lcm grows
            S *= f
            for j in range(1, L + 1):
                m = f ** (L + 1 - j)
                tot[j] *= m
                row = res[j]
                for c in range(p):
                    if row[c]:
                        row[c] *= m
            total *= f**L
        rn = n % p
        q = S // n
        tvals = [0] * (L + 1)
        tvals[L] = q if rn else 0
        for j in range(L - 1, 0, -1):
            acc = tot[j + 1] - res[j + 1][rn]
            if acc:
                tvals[j] = acc * q
        if rn:
            total += tvals[1]
        for j in range(1, L + 1):
            tj = tvals[j]
            if tj:
                tot[j] += tj
                res[j][rn] += tj
    return Fraction(math.factorial(k), top) * Fraction(total, S**L)


def eval_series_terms(series: MhsSeries, p: int) -> Fraction:
    """Value at p of the explicit terms: sum of c * p^b * H_{p-1}(s)."""
    total = Fraction(0)
    for (b, s), c in series.terms.items():
        total += c * Fraction(p) ** b * eval_mhs(p - 1, s)
    return total


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


def _fmt_val(v: Union[int, float, None]) -> str:
    if v is None:
        return "refused"
    if v is INFINITY:
        return "inf"
    return str(v)


class NumericReport:
    """Per-prime valuation records for one claimed congruence/expansion.

    A record is (prime, required, achieved); ``achieved`` is an integer
    valuation, INFINITY for an exact zero difference, or None when the
    evaluation was refused by the work budget.
    """

    def __init__(
        self,
        records: list[tuple[int, Union[int, float], Union[int, float, None]]],
        skipped: list[int] | None = None,
    ) -> None:
        self.records = records
        self.skipped = skipped or []

    @property
    def passed(self) -> bool:
        return bool(self.records) and all(
            got is not None and got >= req for (_p, req, got) in self.records
        )

    @property
    def refused(self) -> list[int]:
        return [p for (p, _req, got) in self.records if got is None]

    def machine_lines(self) -> list[str]:
        out = []
        for p, req, got in self.records:
            if got is None:
                verdict = "REFUSED"
            else:
                verdict = "PASS" if got >= req else "FAIL"
            out.append(f"p={p} req={_fmt_val(req)} got={_fmt_val(got)} {verdict}")
        return out

    def render(self) -> str:
        header = f"{'prime':>6}  {'required':>8}  {'achieved':>8}  verdict"
        rows = [header, "-" * len(header)]
        for p, req, got in self.records:
            if got is None:
                verdict = "REFUSED"
            else:
                verdict = "PASS" if got >= req else "FAIL"
            rows.append(f"{p:>6}  {_fmt_val(req):>8}  {_fmt_val(got):>8}  {verdict}")
        rows.append(f"summary: {'PASS' if self.passed else 'FAIL'}")
        if self.skipped:
            rows.append(
                "skipped (prime divides a coefficient denominator): "
                + ", ".join(str(p) for p in self.skipped)
            )
        return "\n".join(rows)

    def __repr__(self) -> str:
        return f"<NumericReport {'PASS' if self.passed else 'FAIL'} {len(self.records)} primes>"


Subject = Union[
    CongruenceStatement,
    tuple[QuantitySpec, MhsSeries],
    Callable[[int], Fraction],
]


def _series_denominator_primes(series: MhsSeries, window: PrimeWindow) -> set[int]:
    bad: set[int] = set()
    for c in series.terms.values():
        d = c.denominator
        for p in window.primes():
            if d % p == 0:
                bad.add(p)
    return bad


def check_numeric(
    subject: Subject,
    window: PrimeWindow | None = None,
    required: Union[int, float, None] = None,
    work_budget: int = DEFAULT_WORK_BUDGET,
) -> NumericReport:
    """Evaluate a claim at every prime of the window and report valuations.

    ``subject`` may be:

    - a ``CongruenceStatement``: checks v_p(value of lhs_minus_rhs) >=
      modulus_power;
    - a ``(QuantitySpec, MhsSeries)`` pair: checks v_p(quantity - series
      terms) >= series.order (or >= ``required`` when given; an exact series
      requires an exactly zero difference);
    - a callable ``p -> Fraction`` difference, with ``required`` mandatory.

    For the first two forms, primes dividing a coefficient denominator of
    the series are skipped (the series is not p-integral there) and listed
    in the report.
    """
    window = window or PrimeWindow()
    skipped: list[int] = []

    if isinstance(subject, CongruenceStatement):
        series = subject.lhs_minus_rhs
        req = subject.modulus_power if required is None else required
        diff = lambda p: eval_series_terms(series, p)  # noqa: E731
        bad = _series_denominator_primes(series, window)
    elif isinstance(subject, tuple):
        qspec, series = subject
        if required is not None:
            req = required
        elif series.order is not None:
            req = series.order
        else:
            req = INFINITY  # exact claim: difference must vanish
        diff = lambda p: eval_quantity(qspec, p, work_budget) - eval_series_terms(  # noqa: E731
            series, p
        )
        bad = _series_denominator_primes(series, window)
    elif callable(subject):
        if required is None:
            raise ValueError("check_numeric with a callable needs required=")
        req = required
        diff = subject
        bad = set()
    else:
        raise TypeError(f"unsupported subject {subject!r}")

    records: list[tuple[int, Union[int, float], Union[int, float, None]]] = []
    for p in window.primes():
        if p in bad:
            skipped.append(p)
            continue
        try:
            d = diff(p)
        except WorkBudgetExceeded:
            records.append((p, req, None))
            continue
        records.append((p, req, padic_valuation(d, p)))
    return NumericReport(records, skipped)
