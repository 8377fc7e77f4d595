"""Truncated p-adic series of multiple harmonic sums.

The central value type is :class:`MhsSeries`: a finite Q-linear combination
of terms ``c * p^b * H_{p-1}(s)`` together with an explicit error order
``O(p^N)``.  Such a series denotes, for each sufficiently large prime ``p``,
a rational number known up to a p-adic error of valuation at least ``N``.

``order=None`` means the series is *exact*: it carries no error tail and
denotes its value on the nose (e.g. the expansion of a rational function of
``p`` whose denominator divides a power of ``p``).  An exact series renders
without an ``O(p^N)`` tail.

A :class:`CongruenceStatement` asserts that a series vanishes modulo
``p^n`` for all but finitely many primes.  ``decompose_weighted`` splits
such a statement into per-offset *weighted* statements (every term of a
weighted statement has ``p``-exponent equal to the weight of its
composition), whose conjunction implies the original statement.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Union

from .arith import INFINITY, _min_order, _mul_order
from .compositions import Comp, format_comp, stuffle, weight

__all__ = [
    "MhsSeries",
    "CongruenceStatement",
    "decompose_weighted",
    "series_add",
    "series_mul",
    "series_invert_unit",
    "series_truncate",
]

Order = Union[int, None]
Key = tuple[int, Comp]  # (p_exponent, composition)

RationalLike = Union[int, Fraction, str]


def _check_comp(s: object) -> Comp:
    if not isinstance(s, tuple) or not all(isinstance(e, int) and e >= 1 for e in s):
        raise ValueError(f"composition must be a tuple of positive integers, got {s!r}")
    return s


class MhsSeries:
    """Finite sum ``sum_i c_i * p^(b_i) * H_{p-1}(s_i) + O(p^order)``.

    Terms are stored deduplicated on ``(p_exponent, composition)`` with
    nonzero coefficients; any term with ``p_exponent >= order`` is absorbed
    into the error tail at construction time.  Instances are immutable.
    """

    __slots__ = ("_terms", "_order")

    def __init__(
        self,
        terms: Mapping[Key, RationalLike] | Iterable[tuple[Key, RationalLike]] = (),
        order: Order = None,
    ) -> None:
        if order is not None and not isinstance(order, int):
            raise TypeError(f"order must be an int or None, got {order!r}")
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Key, Fraction] = {}
        for (b, s), c in items:
            if not isinstance(b, int):
                raise TypeError(f"p-exponent must be an int, got {b!r}")
            _check_comp(s)
            c = Fraction(c)
            if c == 0:
                continue
            if order is not None and b >= order:
                continue  # absorbed into O(p^order)
            key = (b, s)
            c = acc.get(key, Fraction(0)) + c
            if c == 0:
                acc.pop(key, None)
            else:
                acc[key] = c
        self._terms = acc
        self._order = order

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, order: Order = None) -> "MhsSeries":
        return cls((), order)

    @classmethod
    def constant(cls, c: RationalLike, order: Order = None) -> "MhsSeries":
        return cls({(0, ()): Fraction(c)}, order)

    @classmethod
    def term(cls, c: RationalLike, b: int, s: Comp, order: Order = None) -> "MhsSeries":
        """The single-term series ``c * p^b * H(s) + O(p^order)``."""
        return cls({(b, s): Fraction(c)}, order)

    @classmethod
    def p_power(cls, k: int, order: Order = None) -> "MhsSeries":
        return cls({(k, ()): Fraction(1)}, order)

    # -- accessors -----------------------------------------------------

    @property
    def terms(self) -> dict[Key, Fraction]:
        """Term map ``(p_exponent, composition) -> coefficient`` (a copy)."""
        return dict(self._terms)

    @property
    def order(self) -> Order:
        return self._order

    def coefficient(self, b: int, s: Comp) -> Fraction:
        return self._terms.get((b, s), Fraction(0))

    def constant_coefficient(self) -> Fraction:
        return self._terms.get((0, ()), Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def is_exact(self) -> bool:
        return self._order is None

    def is_weighted(self) -> bool:
        """True when every term has p-exponent equal to its composition weight."""
        return all(b == weight(s) for (b, s) in self._terms)

    def min_valuation(self) -> int | float:
        """Guaranteed lower bound for the p-adic valuation of the value.

        ``min(min_i b_i, order)``; INFINITY for an exact zero.  (Unweighted
        ``H_{p-1}(s)`` values are p-integral, so each term has valuation at
        least its p-exponent.)
        """
        vals: list[int] = [b for (b, _s) in self._terms]
        if self._order is not None:
            vals.append(self._order)
        return min(vals) if vals else INFINITY

    def sorted_terms(self) -> list[tuple[Key, Fraction]]:
        """Terms in canonical order: by p-exponent, then weight, then lexicographic."""
        return sorted(
            self._terms.items(), key=lambda kv: (kv[0][0], weight(kv[0][1]), kv[0][1])
        )

    def __iter__(self) -> Iterator[tuple[Key, Fraction]]:
        return iter(self.sorted_terms())

    # -- ring operations ------------------------------------------------

    def __add__(self, other: "MhsSeries") -> "MhsSeries":
        if not isinstance(other, MhsSeries):
            return NotImplemented
        order = _min_order(self._order, other._order)
        merged = dict(self._terms)
        for key, c in other._terms.items():
            merged[key] = merged.get(key, Fraction(0)) + c
        return MhsSeries(merged, order)

    def __neg__(self) -> "MhsSeries":
        out = MhsSeries.zero(self._order)
        out._terms = {key: -c for key, c in self._terms.items()}
        return out

    def __sub__(self, other: "MhsSeries") -> "MhsSeries":
        if not isinstance(other, MhsSeries):
            return NotImplemented
        return self + (-other)

    def scale(self, c: RationalLike) -> "MhsSeries":
        c = Fraction(c)
        if c == 0:
            return MhsSeries.zero(self._order)
        out = MhsSeries.zero(self._order)
        out._terms = {key: c * v for key, v in self._terms.items()}
        return out

    def shift(self, k: int) -> "MhsSeries":
        """Multiply by the exact power ``p^k``."""
        order = None if self._order is None else self._order + k
        return MhsSeries({(b + k, s): c for (b, s), c in self._terms.items()}, order)

    def mul_term(self, c: RationalLike, b: int, s: Comp) -> "MhsSeries":
        """Multiply by the exact single term ``c * p^b * H(s)`` (stuffle)."""
        c = Fraction(c)
        _check_comp(s)
        order = _mul_order(self._order, None, self.min_valuation(), b)
        if c == 0:
            return MhsSeries.zero(order)
        acc: dict[Key, Fraction] = {}
        for (b1, s1), c1 in self._terms.items():
            for s3, mult in stuffle(s1, s).items():
                key = (b1 + b, s3)
                acc[key] = acc.get(key, Fraction(0)) + c1 * c * mult
        return MhsSeries(acc, order)

    def __mul__(self, other: object) -> "MhsSeries":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, MhsSeries):
            return NotImplemented
        order = _mul_order(
            self._order, other._order, self.min_valuation(), other.min_valuation()
        )
        acc: dict[Key, Fraction] = {}
        for (b1, s1), c1 in self._terms.items():
            for (b2, s2), c2 in other._terms.items():
                c12 = c1 * c2
                b12 = b1 + b2
                for s3, mult in stuffle(s1, s2).items():
                    key = (b12, s3)
                    acc[key] = acc.get(key, Fraction(0)) + c12 * mult
        return MhsSeries(acc, order)

    def __rmul__(self, other: object) -> "MhsSeries":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, n: int) -> "MhsSeries":
        if not isinstance(n, int) or n < 0:
            raise ValueError(f"series power requires a non-negative integer, got {n!r}")
        result = MhsSeries.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def invert_unit(self) -> "MhsSeries":
        """Inverse of a unit series ``c*(1 + u)`` with ``u`` supported in p-exponents >= 1.

        Returns ``c^(-1) * sum_n (-u)^n`` truncated at ``self.order``; the
        product with ``self`` is ``1 + O(p^order)``.
        """
        c = self.constant_coefficient()
        if c == 0:
            raise ValueError("series_invert_unit: constant term is zero (not a unit)")
        bad = [key for key in self._terms if key != (0, ()) and key[0] <= 0]
        if bad:
            raise ValueError(
                "series_invert_unit: non-constant term with p-exponent <= 0: "
                f"{sorted(bad)}"
            )
        u_terms = {key: v / c for key, v in self._terms.items() if key != (0, ())}
        if self._order is None:
            if u_terms:
                raise ValueError(
                    "series_invert_unit: exact series with a non-constant part "
                    "has no finite exact inverse; truncate it first"
                )
            return MhsSeries.constant(1 / c)
        N = self._order
        u = MhsSeries(u_terms, N)
        acc = MhsSeries.constant(1, N)
        power = MhsSeries.constant(1)
        sign = 1
        for _ in range(1, max(N, 1)):
            power = (power * u).truncate(N)
            if power.is_zero():
                break
            sign = -sign
            acc = acc + power.scale(sign)
        return acc.scale(1 / c).truncate(N)

    def truncate(self, N: int) -> "MhsSeries":
        """Weaken to ``O(p^N)``; rejects ``N`` beyond the known order."""
        if self._order is not None and N > self._order:
            raise ValueError(
                f"series_truncate: cannot strengthen O(p^{self._order}) to O(p^{N})"
            )
        return MhsSeries(
            {key: c for key, c in self._terms.items() if key[0] < N}, N
        )

    # -- comparison / rendering -----------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MhsSeries):
            return NotImplemented
        return self._order == other._order and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((frozenset(self._terms.items()), self._order))

    def render(self) -> str:
        """Canonical text form, e.g. ``2 + 2 * p * H(1) + 2 * p^2 * H(1,1) + O(p^3)``.

        Parsed back bit-exactly by the CLI expression grammar.
        """
        items = self.sorted_terms()
        if not items:
            return "0" if self._order is None else f"O(p^{self._order})"
        chunks: list[str] = []
        for i, ((b, s), c) in enumerate(items):
            body = _render_term(abs(c), b, s)
            if i == 0:
                chunks.append(("-" if c < 0 else "") + body)
            else:
                chunks.append((" - " if c < 0 else " + ") + body)
        if self._order is not None:
            chunks.append(f" + O(p^{self._order})")
        return "".join(chunks)

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"<MhsSeries {self.render()}>"


def _render_term(ac: Fraction, b: int, s: Comp) -> str:
    factors: list[str] = []
    if ac != 1 or (b == 0 and not s):
        factors.append(str(ac))
    if b == 1:
        factors.append("p")
    elif b != 0:
        factors.append(f"p^{b}")
    if s:
        factors.append("H" + format_comp(s))
    return " * ".join(factors)


# -- function-style aliases for the operator methods ---------------------


def series_add(a: MhsSeries, b: MhsSeries) -> MhsSeries:
    return a + b


def series_mul(a: MhsSeries, b: MhsSeries) -> MhsSeries:
    return a * b


def series_invert_unit(a: MhsSeries) -> MhsSeries:
    return a.invert_unit()


def series_truncate(a: MhsSeries, N: int) -> MhsSeries:
    return a.truncate(N)


# -- congruence statements ----------------------------------------------


class CongruenceStatement:
    """Assertion that a series vanishes mod ``p^n`` for all but finitely many p.

    ``kind`` classifies the statement by the offsets ``weight(s) - b`` of its
    terms: ``weighted`` (all zero), ``mixed`` (all non-negative), or
    ``general`` (some negative).  The empty statement is trivially true and
    classified as weighted.
    """

    __slots__ = ("_series", "_modulus")

    def __init__(self, lhs_minus_rhs: MhsSeries, modulus_power: int) -> None:
        if not isinstance(lhs_minus_rhs, MhsSeries):
            raise TypeError("lhs_minus_rhs must be an MhsSeries")
        if not isinstance(modulus_power, int):
            raise TypeError("modulus_power must be an int")
        order = lhs_minus_rhs.order
        if order is not None and modulus_power > order:
            raise ValueError(
                f"congruence mod p^{modulus_power} is not expressible from a series "
                f"known only to O(p^{order})"
            )
        self._series = lhs_minus_rhs
        self._modulus = modulus_power

    @property
    def lhs_minus_rhs(self) -> MhsSeries:
        return self._series

    @property
    def modulus_power(self) -> int:
        return self._modulus

    @property
    def kind(self) -> str:
        offsets = [weight(s) - b for (b, s) in self._series.terms]
        if all(k == 0 for k in offsets):
            return "weighted"
        if all(k >= 0 for k in offsets):
            return "mixed"
        return "general"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CongruenceStatement):
            return NotImplemented
        return self._modulus == other._modulus and self._series == other._series

    def __hash__(self) -> int:
        return hash((self._series, self._modulus))

    def __repr__(self) -> str:
        return (
            f"<CongruenceStatement {self._series.render()} = 0 "
            f"mod p^{self._modulus} [{self.kind}]>"
        )


def decompose_weighted(stmt: CongruenceStatement) -> dict[int, CongruenceStatement]:
    """Split a statement into weighted statements, one per offset.

    Terms with offset ``k = weight(s) - b`` are rescaled by ``p^k`` (making
    every term weighted) and asserted modulo ``p^(n+k)``.  The conjunction of
    the outputs implies the input; multiplying each output by ``p^(-k)`` and
    summing reproduces the input's term multiset exactly.
    """
    groups: dict[int, dict[Key, Fraction]] = {}
    for (b, s), c in stmt.lhs_minus_rhs.terms.items():
        k = weight(s) - b
        groups.setdefault(k, {})[(b + k, s)] = c
    order = stmt.lhs_minus_rhs.order
    out: dict[int, CongruenceStatement] = {}
    for k in sorted(groups):
        sub_order = None if order is None else order + k
        sub = MhsSeries(groups[k], sub_order)
        out[k] = CongruenceStatement(sub, stmt.modulus_power + k)
    return out
