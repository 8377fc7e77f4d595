"""Expansions of prime-indexed quantities into p-adic MHS series.

Each function expresses a concrete arithmetic quantity as an
:class:`~padicmhs.series.MhsSeries`: a finite combination
``sum_i c_i * p^b_i * H_{p-1}(s_i)``, either exact (``order=None``) or
truncated with an explicit tail ``O(p^order)``.  Covered quantities:

* rational functions of p (:func:`expand_rational`),
* binomial coefficients with polynomial arguments
  (:func:`expand_binomial_pp`, :func:`expand_binomial_poly`),
* Apery numbers ``b_{p-1}`` (:func:`expand_apery`),
* p-adic zeta values ``p^k * zeta_p(k)`` (:func:`expand_zeta_p`),
* bounded multiple power sums (:func:`expand_power_sum`),
* p-restricted harmonic numbers (:func:`expand_restricted_harmonic`),
* "curious" sums over coprime compositions of ``p^r``
  (:func:`expand_curious`),
* polynomial-weighted sums of harmonic numbers
  (:func:`expand_sum_poly_mhs`),
* half-range and alternating harmonic numbers
  (:func:`expand_half_harmonic`, :func:`expand_alternating`).

Conventions:

* polynomials are ascending coefficient tuples in the prime variable;
* every truncated expansion is sound for all sufficiently large primes:
  the dropped tail has p-adic valuation at least the stamped order;
* all arithmetic is exact rational.

:func:`canonicalize` rewrites a truncated series into its canonical
residual modulo the span of generated double-shuffle relations, offset
part by offset part, without changing its value modulo ``p^order``.
:func:`expand_quantity` dispatches a parsed quantity description to the
matching expansion.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial
from typing import Iterator, Sequence

from .arith import bernoulli, binomial, laurent_expand, power_sum_poly
from .compositions import Comp, stuffle, weight
from .powersums import full_sum, poly_sum, signed_mhs, valuation_bound
from .prover import generate_relations
from .quantities import QuantitySpec
from .series import MhsSeries

__all__ = [
    "canonicalize",
    "expand_alternating",
    "expand_apery",
    "expand_binomial_poly",
    "expand_binomial_pp",
    "expand_curious",
    "expand_half_harmonic",
    "expand_power_sum",
    "expand_quantity",
    "expand_rational",
    "expand_restricted_harmonic",
    "expand_sum_poly_mhs",
    "expand_zeta_p",
    "factorial_ratio",
]

IntPoly = tuple[int, ...]  # ascending coefficients


# ---------------------------------------------------------------------------
# polynomial helpers
# ---------------------------------------------------------------------------


def _int_poly(coeffs: Sequence[int | Fraction], name: str = "polynomial") -> IntPoly:
    out = []
    for c in coeffs:
        c = Fraction(c)
        if c.denominator != 1:
            raise ValueError(f"{name} needs integer coefficients, got {c}")
        out.append(c.numerator)
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def _frac_poly(coeffs: Sequence[int | Fraction]) -> tuple[Fraction, ...]:
    out = [Fraction(c) for c in coeffs]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def _degree(f: IntPoly) -> int:
    return len(f) - 1  # zero polynomial never passed where degree matters


def _poly_sub(f: IntPoly, g: IntPoly) -> IntPoly:
    n = max(len(f), len(g))
    out = [(f[i] if i < len(f) else 0) - (g[i] if i < len(g) else 0) for i in range(n)]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def _validate_order(order: int) -> int:
    if not isinstance(order, int) or isinstance(order, bool):
        raise ValueError(f"order must be an integer, got {order!r}")
    return order


# ---------------------------------------------------------------------------
# rational functions of p
# ---------------------------------------------------------------------------


def expand_rational(
    num: Sequence[int | Fraction], den: Sequence[int | Fraction], order: int
) -> MhsSeries:
    """Laurent expansion of ``num(p)/den(p)`` as a series in powers of p.

    The result has empty compositions only.  It is exact when the division
    terminates (for example when ``den`` divides ``num``); otherwise it is
    truncated at ``order``.
    """
    lp = laurent_expand(list(num), list(den), _validate_order(order))
    terms = {(e, ()): c for e, c in lp.coeffs.items()}
    return MhsSeries(terms, lp.order)


# ---------------------------------------------------------------------------
# p-adic zeta values
# ---------------------------------------------------------------------------


def expand_zeta_p(k: int, order: int) -> MhsSeries:
    """``p^k * zeta_p(k)`` as a weighted series of depth-one sums.

    Uses the classical Bernoulli-coefficient series

        p^k zeta_p(k) = sum_{n >= k-1} (-1)^(k+n+1)/(k-1)
                        * C(n-1, k-2) * B_{n+1-k} * p^n H(n),

    truncated to ``n < order`` (the dropped rows have valuation >= n).
    """
    if not isinstance(k, int) or k < 2:
        raise ValueError(f"zeta expansion needs an integer k >= 2, got {k!r}")
    _validate_order(order)
    terms: dict[tuple[int, Comp], Fraction] = {}
    for n in range(k - 1, max(order, k - 1)):
        if n >= order:
            break
        sign = -1 if (k + n + 1) % 2 else 1
        c = Fraction(sign, k - 1) * binomial(n - 1, k - 2) * bernoulli(n + 1 - k)
        if c:
            terms[(n, (n,))] = c
    return MhsSeries(terms, order)


# ---------------------------------------------------------------------------
# half-range and alternating harmonic numbers
# ---------------------------------------------------------------------------


def expand_half_harmonic(k: int, order: int) -> MhsSeries:
    """``p^k * H_{(p-1)/2}(k)`` as a combination of zeta-value series.

    With Z_m denoting the series for p^m zeta_p(m),

        p^k H_{(p-1)/2}(k) = Z_k + sum_{j >= 0} C(-k, j)
                             * (1 - 2^(k+j))/2^j * Z_{k+j};

    the j-th summand starts at p^(k+j-1), so terms with
    ``k + j - 1 >= order`` are empty.
    """
    if not isinstance(k, int) or k < 2:
        raise ValueError(f"half-range expansion needs an integer k >= 2, got {k!r}")
    _validate_order(order)
    acc = expand_zeta_p(k, order)
    for j in range(0, max(order - k + 1, 0)):
        coeff = binomial(-k, j) * Fraction(1 - 2 ** (k + j), 2**j)
        if coeff:
            acc = acc + expand_zeta_p(k + j, order).scale(coeff)
    return acc


def expand_alternating(k: int, order: int) -> MhsSeries:
    """``p^k * sum_{n=1}^{p-1} (-1)^n / n^k``.

    Splitting even and odd indices gives
    ``2^(1-k) * p^k H_{(p-1)/2}(k) - p^k H(k)``.
    """
    if not isinstance(k, int) or k < 2:
        raise ValueError(f"alternating expansion needs an integer k >= 2, got {k!r}")
    _validate_order(order)
    half = expand_half_harmonic(k, order).scale(Fraction(1, 2 ** (k - 1)))
    return half - MhsSeries.term(1, k, (k,), order)


# ---------------------------------------------------------------------------
# bounded power sums and restricted harmonic numbers
# ---------------------------------------------------------------------------


def expand_power_sum(
    f: Sequence[int | Fraction],
    g: Sequence[int | Fraction],
    exps: Sequence[int],
    restricted: bool,
    order: int,
) -> MhsSeries:
    """Series for ``S_{f(p), g(p)}(exps)`` (restricted variant: indices
    coprime to p), truncated at ``order``.

    ``f`` and ``g`` are integer polynomials (``g`` may be zero, meaning
    lower bound 1); the exponents may be any integers.  The negative
    p-powers that can appear are bounded below by
    ``-deg(f) * sum_i max(exps_i, 0)`` (0 when restricted).
    """
    fi = _int_poly(f, "upper bound")
    gi = _int_poly(g, "lower bound")
    exps = tuple(exps)
    if not all(isinstance(e, int) and not isinstance(e, bool) for e in exps):
        raise ValueError(f"power-sum exponents must be integers, got {exps!r}")
    return full_sum(fi, gi, exps, bool(restricted), _validate_order(order))


def expand_restricted_harmonic(r: int, order: int) -> MhsSeries:
    """Sum of ``1/n`` over ``n <= p^r`` with p not dividing n.

    * ``r = 1``: exactly ``H(1)``.
    * ``r = 2``: the double series
      ``sum_m (-1)^m p^m G_m(p) H(m+1)`` where ``G_m(x) = sum_{a<x} a^m``
      (Faulhaber), truncated at ``order``; the m-th row starts at
      ``p^(m+1)``.
    * ``r > 2``: the general restricted power-sum expansion.
    """
    if not isinstance(r, int) or r < 1:
        raise ValueError(f"restricted harmonic number needs an integer r >= 1, got {r!r}")
    if r == 1:
        return MhsSeries.term(1, 0, (1,), None)
    _validate_order(order)
    if r == 2:
        terms: dict[tuple[int, Comp], Fraction] = {}
        for m in range(0, max(order - 1, 0)):
            sign = -1 if m % 2 else 1
            for e, c in enumerate(power_sum_poly(m)):
                if c == 0:
                    continue
                b = m + e
                if b >= order:
                    continue
                key = (b, (m + 1,))
                terms[key] = terms.get(key, Fraction(0)) + sign * c
        return MhsSeries(terms, order)
    return poly_sum((0,) * r + (1,), (1,), True, order)


# ---------------------------------------------------------------------------
# polynomial-weighted sums of multiple harmonic sums
# ---------------------------------------------------------------------------


def expand_sum_poly_mhs(
    P: Sequence[int | Fraction], s: Comp, order: int | None = None
) -> MhsSeries:
    """``sum_{k=1}^{p-1} P(k) * H_k(s)`` as an exact MHS combination.

    Writing ``R(x) = sum_{k=0}^{x-1} P(k)`` (a polynomial via Faulhaber's
    formula), exchanging the order of summation gives

        sum_k P(k) H_k(s) = R(p) H(s) - sum_d R_d * S_{p-1,0}(s_1 - d, s_2, ..., s_k),

    where the trailing sums with a possibly nonpositive first exponent are
    eliminated exactly.  For empty ``s`` the sum is ``R(p) - P(0)``.  The
    result is exact; ``order`` (if given) truncates it afterwards.
    """
    Pf = _frac_poly(P)
    s = tuple(s)
    if any(not isinstance(e, int) or e < 1 for e in s):
        raise ValueError(f"composition parts must be positive integers, got {s!r}")
    # R(x) = sum_{k<x} P(k), so R(p) - R(n) = sum_{k=n}^{p-1} P(k).
    R: list[Fraction] = []
    for j, c in enumerate(Pf):
        if c == 0:
            continue
        for e, q in enumerate(power_sum_poly(j)):
            while len(R) <= e:
                R.append(Fraction(0))
            R[e] += c * q
    if not s:
        terms = {(e, ()): c for e, c in enumerate(R) if c}
        p0 = Pf[0] if Pf else Fraction(0)
        if p0:
            terms[(0, ())] = terms.get((0, ()), Fraction(0)) - p0
        series = MhsSeries(terms, None)
    else:
        series = MhsSeries({(e, s): c for e, c in enumerate(R) if c}, None)
        for e, c in enumerate(R):
            if c:
                series = series - signed_mhs((s[0] - e,) + s[1:]).scale(c)
    if order is not None:
        series = series.truncate(_validate_order(order))
    return series


# ---------------------------------------------------------------------------
# binomial coefficients via factorial ratios
# ---------------------------------------------------------------------------


def _unit_power(series: MhsSeries, n: int) -> MhsSeries:
    if n < 0:
        series = series.invert_unit()
        n = -n
    out = MhsSeries.constant(1, None)
    for _ in range(n):
        out = out * series
    return out


def factorial_ratio(pairs: Sequence[tuple[Sequence[int], int]], order: int) -> MhsSeries:
    """Series for ``prod_i (P_i(p)!)^(eps_i)`` with ``eps_i = +-1``.

    Each ``P_i`` is an integer polynomial that is eventually nonnegative,
    and the signed sum ``sum_i eps_i P_i`` must be constant, which makes
    the ratio a p-adic unit for large p.  The reduction peels leading
    monomials: for ``P = c x^d + h`` with ``d >= 1``,

    * ``P(p)! = (c p^d)! * h(p)! * U`` when ``h`` is eventually positive,
      where ``U = sum_n c^n p^(dn) S_{h(p),0}(1^n)`` is a unit;
    * ``P(p)! = (c p^d)! / (c p^d * (-1)^(H-1) * (H-1)! * U')`` when ``h``
      is eventually negative, with ``H = -h(p)`` and
      ``U' = sum_n (-c)^n p^(dn) S_{H-1,0}(1^n)``;
    * ``(c p^d)!`` itself splits into ``c`` blocks of length ``p^d``:
      the p-divisible indices contribute ``(c p^(d-1))!`` one level down,
      and the rest contribute restricted units
      ``V_a = sum_n (a p^d)^n S^(p)_{p^d,0}(1^n)`` for ``a = 1..c-1``
      (the block-independent factors cancel because the signed leading
      coefficients at each degree sum to zero).

    Degree-zero leftovers are exact factorials.  The result is the scalar
    prefactor times the product of unit factors, truncated at ``order``
    (exact when no unit factors remain).
    """
    order = _validate_order(order)
    pending: list[tuple[IntPoly, int]] = []
    total = ()
    for poly, eps in pairs:
        if eps not in (1, -1):
            raise ValueError(f"factorial exponents must be +1 or -1, got {eps!r}")
        pi = _int_poly(poly, "factorial argument")
        if pi and pi[-1] < 0:
            raise ValueError(
                f"factorial arguments must be eventually nonnegative, got {pi!r}"
            )
        if pi:
            pending.append((pi, eps))
        if eps == 1:
            total = _poly_sub(total, _poly_sub((), pi))  # total += pi
        else:
            total = _poly_sub(total, pi)
    if len(total) > 1:
        raise ValueError(
            "signed factorial arguments must sum to a constant, got "
            f"degree {_degree(total)}"
        )

    scalar = Fraction(1)
    p_exp = 0
    atoms: dict[tuple, int] = {}

    while pending:
        d = max(_degree(poly) for poly, _ in pending)
        if d == 0:
            for poly, eps in pending:
                c = poly[0]
                if c < 0:
                    raise ValueError(f"negative factorial argument {c}")
                scalar *= Fraction(factorial(c)) ** eps
            break
        level = [(poly, eps) for poly, eps in pending if _degree(poly) == d]
        pending = [(poly, eps) for poly, eps in pending if _degree(poly) < d]
        if sum(eps * poly[-1] for poly, eps in level) != 0:
            raise ValueError("signed leading coefficients must cancel at each degree")
        for poly, eps in level:
            c = poly[-1]
            if c <= 0:
                raise ValueError(f"leading coefficients must be positive, got {c}")
            h = poly[:-1]
            while h and h[-1] == 0:
                h = h[:-1]
            # the (c p^d)! part: restricted units plus one level down
            for a in range(1, c):
                atoms[("V", d, a)] = atoms.get(("V", d, a), 0) + eps
            pending.append(((0,) * (d - 1) + (c,), eps))
            if not h:
                continue
            if h[-1] > 0:
                atoms[("U", d, c, h)] = atoms.get(("U", d, c, h), 0) + eps
                pending.append((h, eps))
            else:
                m = _poly_sub((), h)  # -h
                m = _poly_sub(m, (1,))  # -h - 1, leading coefficient > 0
                # P(p)! = (c p^d)! / (c p^d * (-1)^(H-1) * (H-1)! * U')
                h_at_1 = sum(h)
                if (h_at_1 + 1) % 2:
                    scalar = -scalar
                scalar *= Fraction(1, c) ** eps
                p_exp -= eps * d
                if m:
                    atoms[("U", d, -c, m)] = atoms.get(("U", d, -c, m), 0) - eps
                    pending.append((m, -eps))

    atoms = {key: n for key, n in atoms.items() if n}
    if not atoms:
        return MhsSeries.term(scalar, p_exp, (), None)
    M = order - p_exp
    if M <= 0:
        return MhsSeries.zero(order)
    prod = MhsSeries.constant(1, M)
    for key in sorted(atoms):
        n_exp = atoms[key]
        if key[0] == "V":
            _, d, a = key
            unit = MhsSeries.constant(1, M)
            n = 1
            while d * n < M:
                if d == 1:
                    # S^(p)_{p,0}(1^n) = H_{p-1}(1^n) exactly
                    inner = MhsSeries.term(1, 0, (1,) * n, None)
                else:
                    inner = poly_sum((0,) * d + (1,), (1,) * n, True, M - d * n)
                unit = unit + inner.scale(Fraction(a) ** n).shift(d * n).truncate(M)
                n += 1
        else:
            _, d, c, h = key
            e = _degree(h)
            unit = MhsSeries.constant(1, M)
            n = 1
            while (d - e) * n < M:
                inner = poly_sum(h, (1,) * n, False, M - d * n)
                unit = unit + inner.scale(Fraction(c) ** n).shift(d * n).truncate(M)
                n += 1
        prod = prod * _unit_power(unit, n_exp)
    return prod.shift(p_exp).scale(scalar)


def expand_binomial_poly(
    f: Sequence[int | Fraction], g: Sequence[int | Fraction], order: int
) -> MhsSeries:
    """Series for the binomial coefficient ``C(f(p), g(p))``.

    ``f`` and ``g`` are integer polynomials.  Degenerate shapes resolve to
    exact constants: ``g = 0`` or ``f = g`` give 1; if ``g`` or ``f - g``
    is eventually negative, or ``deg f < deg g``, the coefficient is 0 for
    all large p.  Otherwise the result is the factorial ratio
    ``f! / (g! (f-g)!)``.
    """
    order = _validate_order(order)
    fi = _int_poly(f, "binomial numerator")
    gi = _int_poly(g, "binomial denominator")
    if not gi:
        return MhsSeries.constant(1, None)
    if not fi or fi[-1] < 0:
        raise ValueError(
            f"binomial numerator must have a positive leading coefficient, got {fi!r}"
        )
    if gi[-1] < 0:
        return MhsSeries.zero(None)
    if _degree(fi) < _degree(gi):
        return MhsSeries.zero(None)
    h = _poly_sub(fi, gi)
    if not h:
        return MhsSeries.constant(1, None)
    if h[-1] < 0:
        return MhsSeries.zero(None)
    return factorial_ratio([(fi, 1), (gi, -1), (h, -1)], order)


def expand_binomial_pp(a: int, b: int, r: int, order: int) -> MhsSeries:
    """Series for ``C(a * p^r, b * p^r)``.

    ``r = 0`` is the exact constant ``C(a, b)``; ``r = 1, a = 2, b = 1``
    reproduces the classical central-binomial expansion
    ``2 * sum_n p^n H(1^n)``.
    """
    for name, v in (("a", a), ("b", b), ("r", r)):
        if not isinstance(v, int) or isinstance(v, bool):
            raise ValueError(f"binomial parameter {name} must be an integer, got {v!r}")
    if not (a >= b >= 0):
        raise ValueError(f"binomial parameters need a >= b >= 0, got {a}, {b}")
    if r < 0:
        raise ValueError(f"binomial power must be nonnegative, got {r}")
    if r == 0:
        return MhsSeries.constant(binomial(a, b), None)
    return expand_binomial_poly((0,) * r + (a,), (0,) * r + (b,), order)


# ---------------------------------------------------------------------------
# canonical forms modulo the relation span
# ---------------------------------------------------------------------------


def canonicalize(
    series: MhsSeries, order: int | None = None, *, cache_dir=None
) -> MhsSeries:
    """Reduce each offset part of ``series`` modulo the relation span.

    The output is congruent to the input modulo ``p^order`` and is
    supported, within each offset part, on the non-pivot coordinates of
    the reduced-row-echelon relation basis at that part's modulus.
    Constants (empty compositions) pass through unchanged.
    """
    if order is None:
        order = series.order
    if order is None:
        raise ValueError("canonicalize needs a finite truncation order")
    series = series.truncate(_validate_order(order))
    parts: dict[int, dict[Comp, Fraction]] = {}
    for (b, s), c in series.terms.items():
        parts.setdefault(weight(s) - b, {})[s] = c
    out: dict[tuple[int, Comp], Fraction] = {}
    for k in sorted(parts):
        basis = generate_relations(order + k, cache_dir=cache_dir)
        for s, c in basis.reduce(parts[k]).items():
            if weight(s) - k >= order:
                continue
            out[(weight(s) - k, s)] = c
    return MhsSeries(out, order)


# ---------------------------------------------------------------------------
# Apery numbers
# ---------------------------------------------------------------------------


def expand_apery(order: int, *, cache_dir=None) -> MhsSeries:
    """Apery number ``b_{p-1} = sum_k C(p-1,k)^2 C(p-1+k,k)^2`` as a
    canonical weighted series.

    Pairing the two square factors term by term gives the exact identity

        b_{p-1} = 1 + sum_{k=1}^{p-1} (p^4/k^4 - 2 p^3/k^3 + p^2/k^2)
                  * ( sum_{i>=0} (-1)^i p^(2i) H_{k-1}(2^i) )^2.

    The square expands by the stuffle product; multiplying by ``p^a/k^a``
    and summing over k turns ``H_{k-1}(w)`` into ``H_{p-1}((a,) + w)``.
    Every term is weighted, so the series is canonicalized at ``order``.
    """
    order = _validate_order(order)
    terms: dict[tuple[int, Comp], Fraction] = {}
    if order > 0:
        terms[(0, ())] = Fraction(1)
    for a, ca in ((2, 1), (3, -2), (4, 1)):
        i = 0
        while a + 2 * i < order:
            j = 0
            while a + 2 * i + 2 * j < order:
                sign = -1 if (i + j) % 2 else 1
                b = a + 2 * i + 2 * j
                for w, mult in stuffle((2,) * i, (2,) * j).items():
                    comp = (a,) + w
                    key = (b, comp)
                    terms[key] = terms.get(key, Fraction(0)) + Fraction(ca * sign * mult)
                j += 1
            i += 1
    raw = MhsSeries({k: v for k, v in terms.items() if v}, order)
    return canonicalize(raw, order, cache_dir=cache_dir)


# ---------------------------------------------------------------------------
# curious sums over coprime compositions of p^r
# ---------------------------------------------------------------------------


def _compositions_of(k: int) -> Iterator[tuple[int, ...]]:
    if k == 0:
        yield ()
        return
    for first in range(1, k + 1):
        for rest in _compositions_of(k - first):
            yield (first,) + rest


def expand_curious(r: int, k: int, order: int, *, cache_dir=None) -> MhsSeries:
    """Sum of ``1/(n_1 ... n_k)`` over compositions ``n_1 + ... + n_k = p^r``
    with every part coprime to p.

    * ``k = 1``: the only candidate part is ``p^r`` itself, which is not
      coprime to p, so the sum is empty: exactly 0.
    * ``r = 1``: symmetrizing over orderings gives exactly
      ``k!/p * H(1^(k-1))``.
    * ``r, k >= 2``: symmetrize to chains of partial sums
      ``p^r = m_1 > ... > m_k >= 1`` with consecutive differences and the
      last entry coprime to p, write ``m_i = a_i p - j_i``, and expand;
      see :func:`_expand_curious_general`.  The result is canonicalized.
    """
    for name, v in (("r", r), ("k", k)):
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise ValueError(f"curious parameter {name} must be a positive integer, got {v!r}")
    if k == 1:
        return MhsSeries.zero(None)
    if r == 1:
        return MhsSeries.term(factorial(k), -1, (1,) * (k - 1), None)
    order = _validate_order(order)
    raw = _expand_curious_general(r, k, order)
    return canonicalize(raw, order, cache_dir=cache_dir)


def _expand_curious_general(r: int, k: int, order: int) -> MhsSeries:
    """Expansion of the curious sum for ``r, k >= 2``, truncated at ``order``.

    After symmetrizing, the sum runs over ``p^(r-1) = a_1 >= ... >= a_k >= 1``
    and digits ``j_i`` with ``m_i = a_i p - j_i``, subject to: ``j_1 = 0``,
    ``j_k != 0``, ``j_i < j_(i+1)`` whenever ``a_i = a_(i+1)``, and
    ``j_i != j_(i+1)`` throughout.  Equal-a runs form strictly decreasing
    a-chains below ``p^(r-1)``; the j-inequalities across run boundaries
    are handled by inclusion-exclusion over the boundary subsets forced to
    be equal, which glues adjacent runs into longer strictly increasing
    j-chains whose junction slots collect both exponents.  Chains of
    distinct blocks multiply via the stuffle product; each factor
    ``(a p - j)^(-1)`` with ``j >= 1`` expands geometrically as
    ``-sum_n (a p)^n j^(-1-n)``, while ``j = 0`` slots contribute
    ``(a p)^(-1)`` directly.
    """
    acc = MhsSeries.zero(order)
    kfact = factorial(k)
    pinned_exp = r - 1  # a_1 = p^(r-1)
    a_poly = (-1,) + (0,) * (r - 2) + (1,)  # x^(r-1) - 1

    for runs in _compositions_of(k):
        t = len(runs)
        run_of: list[int] = []
        for ri, size in enumerate(runs):
            run_of.extend([ri] * size)
        run_positions: list[list[int]] = [[] for _ in range(t)]
        for pos, ri in enumerate(run_of):
            run_positions[ri].append(pos)
        for e_mask in range(1 << (t - 1)):
            glued = [bool(e_mask >> i & 1) for i in range(t - 1)]
            e_size = sum(glued)
            # blocks of consecutive runs joined by glued boundaries
            blocks: list[list[int]] = [[0]]
            for i in range(1, t):
                if glued[i - 1]:
                    blocks[-1].append(i)
                else:
                    blocks.append([i])
            # slots: one per position, except glued junctions share a slot
            block_slots: list[list[list[int]]] = []
            for block in blocks:
                slots: list[list[int]] = []
                for ri in block:
                    for idx, pos in enumerate(run_positions[ri]):
                        if idx == 0 and ri != block[0]:
                            slots[-1].append(pos)
                        else:
                            slots.append([pos])
                block_slots.append(slots)
            last_block = len(blocks) - 1
            if last_block == 0 and len(block_slots[0]) == 1:
                continue  # j_1 = 0 and j_k != 0 cannot both hold
            # blocks other than the first may place their lowest slot at j = 0,
            # except a single-slot final block (its slot is j_k != 0)
            optional = [
                bi
                for bi in range(1, len(blocks))
                if not (bi == last_block and len(block_slots[bi]) == 1)
            ]
            for z_mask in range(1 << len(optional)):
                zero_blocks = {0} | {
                    optional[i] for i in range(len(optional)) if z_mask >> i & 1
                }
                zero_positions: set[int] = set()
                for bi in zero_blocks:
                    zero_positions.update(block_slots[bi][0])
                geom = [pos for pos in range(k) if pos not in zero_positions]
                nj0 = [0] * t
                for pos in zero_positions:
                    nj0[run_of[pos]] += 1
                base_sign = -1 if (len(geom) + e_size) % 2 else 1

                def profile(nvec: dict[int, int]) -> tuple[int, tuple[int, ...]]:
                    run_n = [0] * t
                    for pos, n in nvec.items():
                        run_n[run_of[pos]] += n
                    shift = (
                        sum(nvec.values())
                        - len(zero_positions)
                        + pinned_exp * (run_n[0] - nj0[0])
                    )
                    svec = tuple(nj0[ri] - run_n[ri] for ri in range(1, t))
                    return shift, svec

                def bound(nvec: dict[int, int]) -> int:
                    # valuation floor of this piece: dropping it entirely is
                    # sound once the floor reaches the target order
                    shift, svec = profile(nvec)
                    return shift + valuation_bound(pinned_exp, svec, False)

                def emit(nvec: dict[int, int]) -> None:
                    nonlocal acc
                    shift, svec = profile(nvec)
                    if t > 1:
                        a_part = poly_sum(a_poly, svec, False, order - shift)
                    else:
                        a_part = MhsSeries.constant(1, None)
                    j_part = MhsSeries.constant(1, None)
                    for bi, slots in enumerate(block_slots):
                        sigma = []
                        for si, slot in enumerate(slots):
                            if bi in zero_blocks and si == 0:
                                continue
                            sigma.append(sum(1 + nvec[pos] for pos in slot))
                        if sigma:
                            j_part = j_part * MhsSeries.term(
                                1, 0, tuple(reversed(sigma)), None
                            )
                    piece = (j_part * a_part).shift(shift).scale(kfact * base_sign)
                    acc = acc + piece.truncate(order)

                def dfs(i: int, nvec: dict[int, int]) -> None:
                    # every extra geometric term raises the floor by >= 1,
                    # so each loop below terminates
                    if bound(nvec) >= order:
                        return
                    if i == len(geom):
                        emit(nvec)
                        return
                    n = 0
                    while True:
                        nvec[geom[i]] = n
                        if bound(nvec) >= order:
                            del nvec[geom[i]]
                            return
                        dfs(i + 1, nvec)
                        n += 1

                dfs(0, {})
    return acc


# ---------------------------------------------------------------------------
# dispatcher
# ---------------------------------------------------------------------------


def expand_quantity(spec: QuantitySpec, order: int, *, cache_dir=None) -> MhsSeries:
    """Expand a parsed quantity description at the given order.

    Inherently exact quantities (rational functions, polynomial-weighted
    harmonic sums, the r = 1 restricted harmonic number, degenerate
    binomial shapes) come back exact and ignore the order.
    """
    name, args = spec.name, spec.args
    if name == "binp":
        a, b, r = args
        return expand_binomial_pp(a, b, r, order)
    if name == "binpoly":
        f, g = args
        return expand_binomial_poly(f, g, order)
    if name == "apery":
        return expand_apery(order, cache_dir=cache_dir)
    if name == "zetap":
        return expand_zeta_p(args[0], order)
    if name == "psum":
        f, g, exps, restricted = args
        return expand_power_sum(f, g, exps, restricted, order)
    if name == "hres":
        return expand_restricted_harmonic(args[0], order)
    if name == "curious":
        r, k = args
        return expand_curious(r, k, order, cache_dir=cache_dir)
    if name == "sumpoly":
        P, s = args
        return expand_sum_poly_mhs(P, s)
    if name == "half":
        return expand_half_harmonic(args[0], order)
    if name == "alt":
        return expand_alternating(args[0], order)
    if name == "rat":
        num, den = args
        return expand_rational(num, den, order)
    raise ValueError(f"unknown quantity {name!r}")
