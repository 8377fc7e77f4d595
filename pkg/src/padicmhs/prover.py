"""Relation generation and exact proof search for weighted congruences.

A *weighted congruence* asserts that a rational linear combination of
weighted multiple harmonic sums ``h_p(s) = p^weight(s) * H_{p-1}(s)``
vanishes modulo ``p^n`` for all but finitely many primes ``p``.  This module
generates a stock of such congruences by truncating Jarossay's double-shuffle
family of p-adically convergent identities, assembles the truncations into a
reduced row echelon matrix over exact rationals, and decides whether a
candidate congruence lies in their Q-linear span.  Successful decisions are
recorded as :class:`ProofCertificate` objects naming the generating
identities and their multipliers, so a proof can be replayed later by pure
arithmetic with no linear algebra.

The underlying identity: for compositions ``s`` and ``t`` (``t`` nonempty),

    h_p(s sh t)  =  (-1)^weight(t) * sum over a_1..a_m >= 0 of
                    prod C(a_i + t_i - 1, t_i - 1)
                    * h_p(t_m + a_m, ..., t_1 + a_1, s_1, ..., s_k)

where ``s sh t`` is the shuffle of the x/y-word encodings and ``m = len(t)``.
Discarding all terms of weight >= n yields a weighted congruence mod p^n.
Multiplying a truncated identity by ``h_p(u)`` (a stuffle product, which
preserves weight) yields further congruences; the generator enumerates every
triple ``(s, t, u)`` with ``weight(s) + weight(t) + weight(u) < n``.
"""

from __future__ import annotations

import os
import re
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from .arith import INFINITY, binomial
from .compositions import (
    Comp,
    enumerate_compositions,
    format_comp,
    parse_comp,
    shuffle,
    stuffle,
    weight,
)
from .series import CongruenceStatement, MhsSeries, decompose_weighted

__all__ = [
    "BASIS_FORMAT_VERSION",
    "CACHE_ENV_VAR",
    "CERTIFICATE_FORMAT_VERSION",
    "ProofCertificate",
    "RelationBasis",
    "RelationVector",
    "all_proved",
    "clear_relation_cache",
    "dump_certificates",
    "generate_relations",
    "jarossay_relation",
    "prove_mixed",
    "prove_supercongruence",
    "prove_weighted",
    "provable_valuation",
    "replay_certificate",
    "verify_certificate_text",
]

#: Provenance of a generated relation: the triple (s, t, u).
Prov = tuple[Comp, Comp, Comp]

_ZERO = Fraction(0)
_ONE = Fraction(1)

BASIS_FORMAT_VERSION = 1
CERTIFICATE_FORMAT_VERSION = 1

#: Environment variable overriding the on-disk relation cache directory.
CACHE_ENV_VAR = "PADICMHS_CACHE_DIR"

#: Upper bound on the upward scan used for exact series in
#: :func:`provable_valuation` (a loud stop instead of a silent hang).
EXACT_SCAN_LIMIT = 64


# -- small helpers --------------------------------------------------------


def _check_comp(s: object, *, allow_empty: bool = True, name: str = "composition") -> Comp:
    if not isinstance(s, tuple) or not all(isinstance(e, int) and e >= 1 for e in s):
        raise ValueError(f"{name} must be a tuple of positive integers, got {s!r}")
    if not allow_empty and not s:
        raise ValueError(f"{name} must be a nonempty composition")
    return s


def _col_key(w: Comp) -> tuple:
    """Sort key reproducing the enumerate_compositions column order."""
    return (weight(w), w)


def _axpy(dst: dict, src: Mapping, c: Fraction) -> None:
    """In-place ``dst += c * src`` over sparse mappings, dropping zeros."""
    if c == 0:
        return
    for k, v in src.items():
        nv = dst.get(k, _ZERO) + c * v
        if nv:
            dst[k] = nv
        else:
            dst.pop(k, None)


def _tuples_summing_at_most(m: int, bound: int) -> Iterator[tuple[int, ...]]:
    """All m-tuples of non-negative integers with sum <= bound."""
    if m == 0:
        if bound >= 0:
            yield ()
        return
    for first in range(bound + 1):
        for rest in _tuples_summing_at_most(m - 1, bound - first):
            yield (first,) + rest


# -- relation construction ------------------------------------------------


@lru_cache(maxsize=None)
def _jarossay_identity(s: Comp, t: Comp, n: int) -> tuple[tuple[Comp, Fraction], ...]:
    """LHS minus RHS of the double-shuffle identity, truncated to weight < n.

    Requires ``weight(s) + weight(t) < n``; with that precondition every
    retained composition automatically has weight < n, on both sides.  ``s``
    may be empty (the identity then rewrites ``h_p(t)`` itself); ``t`` empty
    gives the empty vector.  Returns a sorted tuple of (composition,
    coefficient) pairs with zero coefficients removed.
    """
    if weight(s) + weight(t) >= n:
        raise ValueError("identity truncation requires weight(s) + weight(t) < n")
    coords: dict[Comp, Fraction] = {}
    for w, mult in shuffle(s, t).items():
        coords[w] = coords.get(w, _ZERO) + mult
    m = len(t)
    sign = -1 if weight(t) % 2 else 1
    budget = n - 1 - weight(s) - weight(t)
    for a in _tuples_summing_at_most(m, budget):
        coeff = _ONE
        for ai, ti in zip(a, t):
            coeff *= binomial(ai + ti - 1, ti - 1)
        w = tuple(t[i] + a[i] for i in range(m - 1, -1, -1)) + s
        coords[w] = coords.get(w, _ZERO) - sign * coeff
    return tuple(sorted((w, c) for w, c in coords.items() if c != 0))


def _relation_coords(s: Comp, t: Comp, u: Comp, n: int) -> dict[Comp, Fraction]:
    """Coordinates of the relation for the triple (s, t, u) at modulus n.

    The (s, t) identity is truncated to weight < n - weight(u) and then
    multiplied by ``h_p(u)`` via the stuffle product.  Stuffle preserves
    weight, so every retained composition has weight < n.
    """
    base = _jarossay_identity(s, t, n - weight(u))
    if not u:
        return dict(base)
    out: dict[Comp, Fraction] = {}
    for w, c in base:
        for v, mult in stuffle(w, u).items():
            nv = out.get(v, _ZERO) + c * mult
            if nv:
                out[v] = nv
            else:
                out.pop(v, None)
    return out


class RelationVector:
    """A weighted congruence: sum of coords[w] * h_p(w) == 0 (mod p^n).

    ``coords`` maps compositions (each of weight < ``modulus_power``) to
    rational coefficients; ``provenance`` names the triple (s, t, u) the
    vector was generated from.
    """

    __slots__ = ("_coords", "_modulus", "_provenance")

    def __init__(
        self,
        coords: Mapping[Comp, Fraction],
        modulus_power: int,
        provenance: Prov,
    ) -> None:
        if not isinstance(modulus_power, int):
            raise TypeError("modulus_power must be an int")
        cleaned: dict[Comp, Fraction] = {}
        for w, c in dict(coords).items():
            _check_comp(w)
            c = Fraction(c)
            if c == 0:
                continue
            if weight(w) >= modulus_power:
                raise ValueError(
                    f"coordinate {format_comp(w)} has weight >= modulus power "
                    f"{modulus_power}"
                )
            cleaned[w] = c
        if not (isinstance(provenance, tuple) and len(provenance) == 3):
            raise ValueError("provenance must be a triple (s, t, u) of compositions")
        for part in provenance:
            _check_comp(part, name="provenance component")
        self._coords = cleaned
        self._modulus = modulus_power
        self._provenance = provenance

    @property
    def coords(self) -> dict[Comp, Fraction]:
        return dict(self._coords)

    @property
    def modulus_power(self) -> int:
        return self._modulus

    @property
    def provenance(self) -> Prov:
        return self._provenance

    def sorted_coords(self) -> list[tuple[Comp, Fraction]]:
        """Coordinates in the canonical column order."""
        return sorted(self._coords.items(), key=lambda it: _col_key(it[0]))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RelationVector):
            return NotImplemented
        return (
            self._modulus == other._modulus
            and self._coords == other._coords
            and self._provenance == other._provenance
        )

    def __repr__(self) -> str:
        body = " + ".join(
            f"{c}*h{format_comp(w)}" for w, c in self.sorted_coords()
        )
        return f"<RelationVector {body or '0'} = 0 mod p^{self._modulus}>"


def jarossay_relation(s: Comp, t: Comp, n: int) -> RelationVector:
    """The mod-p^n truncation of the double-shuffle identity for (s, t).

    ``s`` and ``t`` must be nonempty compositions with
    ``weight(s) + weight(t) < n``.
    """
    s = _check_comp(tuple(s), allow_empty=False, name="s")
    t = _check_comp(tuple(t), allow_empty=False, name="t")
    if not isinstance(n, int):
        raise TypeError("n must be an int")
    if weight(s) + weight(t) >= n:
        raise ValueError(
            f"weight(s) + weight(t) = {weight(s) + weight(t)} must be < n = {n}"
        )
    return RelationVector(_relation_coords(s, t, (), n), n, (s, t, ()))


# -- echelonized bases -----------------------------------------------------


class RelationBasis:
    """Echelonized stock of truncated relations at one modulus power.

    Rows are kept in reduced row echelon form over the column order of
    ``enumerate_compositions(n - 1)`` (pivot coefficient 1, pivot column
    cleared from every other row).  Each row also records the exact rational
    combination of original (s, t, u) relations it arose from, so that
    span-membership answers can be exported as certificates that reference
    only the original, independently recomputable relations.
    """

    __slots__ = ("_modulus", "_columns", "_col_index", "_pivots", "_rows", "_combos")

    def __init__(
        self,
        modulus_power: int,
        pivots: Sequence[Comp],
        rows: Sequence[Mapping[Comp, Fraction]],
        combos: Sequence[Mapping[Prov, Fraction]],
        provenances: Sequence[Prov],
    ) -> None:
        if not isinstance(modulus_power, int) or modulus_power < 1:
            raise ValueError("modulus_power must be a positive int")
        if not (len(pivots) == len(rows) == len(combos) == len(provenances)):
            raise ValueError("pivots, rows, combos, provenances must align")
        self._modulus = modulus_power
        self._columns = enumerate_compositions(modulus_power - 1)
        self._col_index = {w: i for i, w in enumerate(self._columns)}
        last = -1
        vectors: list[RelationVector] = []
        kept_combos: list[dict[Prov, Fraction]] = []
        for piv, row, combo, prov in zip(pivots, rows, combos, provenances):
            idx = self._col_index.get(piv)
            if idx is None:
                raise ValueError(f"pivot {format_comp(piv)} outside column range")
            if idx <= last:
                raise ValueError("pivot columns must be strictly increasing")
            last = idx
            if row.get(piv) != 1:
                raise ValueError("echelon rows must have pivot coefficient 1")
            vectors.append(RelationVector(row, modulus_power, prov))
            kept_combos.append({p: Fraction(c) for p, c in combo.items() if c != 0})
        self._pivots = list(pivots)
        self._rows = vectors
        self._combos = kept_combos

    @property
    def modulus_power(self) -> int:
        return self._modulus

    @property
    def rank(self) -> int:
        return len(self._rows)

    @property
    def rows(self) -> list[RelationVector]:
        return list(self._rows)

    @property
    def pivots(self) -> list[Comp]:
        return list(self._pivots)

    @property
    def columns(self) -> list[Comp]:
        return list(self._columns)

    def combination_of(self, index: int) -> dict[Prov, Fraction]:
        """The tracked origin of row ``index`` as original-relation multipliers."""
        return dict(self._combos[index])

    def _validate_coords(self, coords: Mapping[Comp, Fraction]) -> None:
        for w in coords:
            if w not in self._col_index:
                raise ValueError(
                    f"coordinate {format_comp(w)} has weight >= modulus power "
                    f"{self._modulus}"
                )

    def reduce(self, coords: Mapping[Comp, Fraction]) -> dict[Comp, Fraction]:
        """Canonical representative of ``coords`` modulo the row span."""
        self._validate_coords(coords)
        residual = {w: Fraction(c) for w, c in coords.items() if c != 0}
        for i, piv in enumerate(self._pivots):
            c = residual.get(piv)
            if c:
                _axpy(residual, self._rows[i]._coords, -c)
        return residual

    def express(
        self, coords: Mapping[Comp, Fraction]
    ) -> dict[Prov, Fraction] | None:
        """Write ``coords`` as a combination of original relations, if possible.

        Returns a mapping from provenance triples to multipliers such that
        the exact sum of multiplier * relation reproduces ``coords``; returns
        None when ``coords`` is outside the span.
        """
        self._validate_coords(coords)
        residual = {w: Fraction(c) for w, c in coords.items() if c != 0}
        combo: dict[Prov, Fraction] = {}
        for i, piv in enumerate(self._pivots):
            c = residual.get(piv)
            if c:
                _axpy(residual, self._rows[i]._coords, -c)
                _axpy(combo, self._combos[i], c)
        if residual:
            return None
        return combo

    # -- serialization ----------------------------------------------------

    def dump(self) -> str:
        """Self-describing text form (also the on-disk cache format)."""
        lines = [
            f"padicmhs-basis {BASIS_FORMAT_VERSION}",
            f"modulus {self._modulus}",
            f"columns {len(self._columns)}",
            f"rows {len(self._rows)}",
        ]
        for i, vec in enumerate(self._rows):
            lines.append(
                f"row pivot={format_comp(self._pivots[i])} "
                f"provenance={_format_prov(vec.provenance)}"
            )
            for w, c in vec.sorted_coords():
                lines.append(f"c {format_comp(w)} {c}")
            for prov, c in sorted(self._combos[i].items()):
                lines.append(f"k {_format_prov(prov)} {c}")
            lines.append("end row")
        lines.append("end basis")
        return "\n".join(lines) + "\n"

    @classmethod
    def load(cls, text: str) -> "RelationBasis":
        """Inverse of :meth:`dump`; raises ValueError on malformed input."""
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        it = iter(lines)

        def expect(prefix: str) -> str:
            try:
                line = next(it)
            except StopIteration:
                raise ValueError(f"basis text ended early, expected {prefix!r}")
            if not line.startswith(prefix):
                raise ValueError(f"expected {prefix!r}, got {line!r}")
            return line[len(prefix):].strip()

        version = expect("padicmhs-basis")
        if version != str(BASIS_FORMAT_VERSION):
            raise ValueError(f"unsupported basis format version {version!r}")
        modulus = int(expect("modulus"))
        ncols = int(expect("columns"))
        nrows = int(expect("rows"))
        if ncols != len(enumerate_compositions(modulus - 1)):
            raise ValueError("column count does not match the modulus power")
        pivots: list[Comp] = []
        rows: list[dict[Comp, Fraction]] = []
        combos: list[dict[Prov, Fraction]] = []
        provs: list[Prov] = []
        for _ in range(nrows):
            header = expect("row ")
            m = re.fullmatch(r"pivot=(\([^)]*\))\s+provenance=\[(.*)\]", header)
            if m is None:
                raise ValueError(f"malformed row header: {header!r}")
            pivots.append(parse_comp(m.group(1)))
            provs.append(_parse_prov("[" + m.group(2) + "]"))
            coords: dict[Comp, Fraction] = {}
            combo: dict[Prov, Fraction] = {}
            while True:
                try:
                    line = next(it)
                except StopIteration:
                    raise ValueError("basis text ended inside a row")
                if line == "end row":
                    break
                tag, _, rest = line.partition(" ")
                field, _, value = rest.rpartition(" ")
                if tag == "c":
                    coords[parse_comp(field)] = Fraction(value)
                elif tag == "k":
                    combo[_parse_prov(field)] = Fraction(value)
                else:
                    raise ValueError(f"unexpected line in row: {line!r}")
            rows.append(coords)
            combos.append(combo)
        if expect("end basis") != "":
            raise ValueError("trailing content after 'end basis'")
        return cls(modulus, pivots, rows, combos, provs)


def _format_prov(prov: Prov) -> str:
    s, t, u = prov
    return f"[s={format_comp(s)};t={format_comp(t)};u={format_comp(u)}]"


def _parse_prov(text: str) -> Prov:
    m = re.fullmatch(r"\[s=(\([^)]*\));t=(\([^)]*\));u=(\([^)]*\))\]", text.strip())
    if m is None:
        raise ValueError(f"malformed provenance: {text!r}")
    return (parse_comp(m.group(1)), parse_comp(m.group(2)), parse_comp(m.group(3)))


# -- generation with caching ----------------------------------------------

_PROCESS_BASES: dict[int, RelationBasis] = {}


def clear_relation_cache() -> None:
    """Forget all in-process bases (on-disk cache files are left alone)."""
    _PROCESS_BASES.clear()


def _resolve_cache_dir(cache_dir: str | os.PathLike | None) -> Path:
    if cache_dir is not None:
        return Path(cache_dir)
    env = os.environ.get(CACHE_ENV_VAR)
    if env:
        return Path(env)
    xdg = os.environ.get("XDG_CACHE_HOME")
    base = Path(xdg) if xdg else Path.home() / ".cache"
    return base / "padicmhs"


def _cache_path(n: int, cache_dir: str | os.PathLike | None) -> Path:
    return _resolve_cache_dir(cache_dir) / f"relations-n{n}-v{BASIS_FORMAT_VERSION}.txt"


def _enumerate_triples(n: int) -> Iterator[Prov]:
    """Triples (s, t, u), t nonempty, total weight < n, in a fixed order."""
    comps = enumerate_compositions(n - 1)  # weight-ascending; () first
    nonempty = [c for c in comps if c]
    for s in comps:
        ws = weight(s)
        for t in nonempty:
            wst = ws + weight(t)
            if wst >= n:
                break  # t is weight-ascending
            for u in comps:
                if wst + weight(u) >= n:
                    break  # u is weight-ascending
                yield (s, t, u)


def generate_relations(
    n: int, cache_dir: str | os.PathLike | None = None
) -> RelationBasis:
    """Echelonized basis of all generated relations at modulus power ``n``.

    Enumerates every triple ``(s, t, u)`` with ``t`` nonempty (``s`` and
    ``u`` may be empty) and total weight below ``n``, truncates the (s, t)
    identity to weight < n - weight(u), multiplies by ``h_p(u)`` under the
    stuffle product, and reduces the resulting vectors to reduced row
    echelon form with exact rational arithmetic.  Bases are memoized per
    process and persisted as versioned text files in ``cache_dir`` (argument,
    else the PADICMHS_CACHE_DIR environment variable, else a per-user cache
    directory); unreadable or stale cache files are regenerated.
    """
    if not isinstance(n, int) or n < 1:
        raise ValueError("modulus power n must be a positive int")
    basis = _PROCESS_BASES.get(n)
    if basis is not None:
        return basis
    path = _cache_path(n, cache_dir)
    if path.exists():
        try:
            basis = RelationBasis.load(path.read_text())
            if basis.modulus_power != n:
                raise ValueError("cache file modulus mismatch")
        except (ValueError, OSError):
            basis = None
        if basis is not None:
            _PROCESS_BASES[n] = basis
            return basis

    col_index = {w: i for i, w in enumerate(enumerate_compositions(n - 1))}
    pivots: list[Comp] = []
    rows: list[dict[Comp, Fraction]] = []
    combos: list[dict[Prov, Fraction]] = []
    first_seen: dict[Prov, int] = {}
    for gen_index, prov in enumerate(_enumerate_triples(n)):
        s, t, u = prov
        work = _relation_coords(s, t, u, n)
        if not work:
            continue
        first_seen.setdefault(prov, gen_index)
        combo: dict[Prov, Fraction] = {prov: _ONE}
        for i, piv in enumerate(pivots):
            c = work.get(piv)
            if c:
                _axpy(work, rows[i], -c)
                _axpy(combo, combos[i], -c)
        if not work:
            continue
        piv = min(work, key=col_index.__getitem__)
        inv = _ONE / work[piv]
        work = {w: c * inv for w, c in work.items()}
        combo = {pr: c * inv for pr, c in combo.items()}
        for i in range(len(pivots)):
            c = rows[i].get(piv)
            if c:
                _axpy(rows[i], work, -c)
                _axpy(combos[i], combo, -c)
        pos = len(pivots)
        target_idx = col_index[piv]
        while pos > 0 and col_index[pivots[pos - 1]] > target_idx:
            pos -= 1
        pivots.insert(pos, piv)
        rows.insert(pos, work)
        combos.insert(pos, combo)

    provenances = [
        min(combo, key=lambda pr: first_seen.get(pr, 1 << 30)) for combo in combos
    ]
    basis = RelationBasis(n, pivots, rows, combos, provenances)
    _PROCESS_BASES[n] = basis
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(basis.dump())
        tmp.replace(path)
    except OSError:
        pass  # persisting is best-effort; the in-process basis is authoritative
    return basis


# -- proof search ----------------------------------------------------------


class ProofCertificate:
    """Outcome of a span-membership decision for one weighted congruence.

    When ``verdict`` is "proved", summing ``multiplier * relation(s, t, u)``
    over the combination (each relation regenerated at the target's modulus
    power from its provenance alone) reproduces the target's coordinate
    vector exactly; :func:`replay_certificate` performs that check.
    """

    __slots__ = ("_target", "_combination", "_verdict")

    def __init__(
        self,
        target: CongruenceStatement,
        combination: Iterable[tuple[Prov, Fraction]],
        verdict: str,
    ) -> None:
        if not isinstance(target, CongruenceStatement):
            raise TypeError("target must be a CongruenceStatement")
        if verdict not in ("proved", "unproven"):
            raise ValueError("verdict must be 'proved' or 'unproven'")
        combo = tuple((prov, Fraction(mult)) for prov, mult in combination)
        for prov, _ in combo:
            if not (isinstance(prov, tuple) and len(prov) == 3):
                raise ValueError("combination entries must be ((s, t, u), multiplier)")
        if verdict == "unproven" and combo:
            raise ValueError("an unproven certificate cannot carry a combination")
        self._target = target
        self._combination = combo
        self._verdict = verdict

    @property
    def target(self) -> CongruenceStatement:
        return self._target

    @property
    def combination(self) -> tuple[tuple[Prov, Fraction], ...]:
        return self._combination

    @property
    def verdict(self) -> str:
        return self._verdict

    @property
    def proved(self) -> bool:
        return self._verdict == "proved"

    def __repr__(self) -> str:
        return (
            f"<ProofCertificate {self._verdict} "
            f"mod p^{self._target.modulus_power} "
            f"({len(self._combination)} relations)>"
        )


def _statement_coords(stmt: CongruenceStatement) -> dict[Comp, Fraction]:
    """Coordinate vector of a weighted statement over compositions.

    Terms of weight >= the modulus power are dropped: each such ``h_p(w)``
    has p-adic valuation >= weight(w) on its own, so it is zero modulo the
    statement's power and does not affect provability.
    """
    if stmt.kind != "weighted":
        raise ValueError(f"expected a weighted statement, got kind {stmt.kind!r}")
    n = stmt.modulus_power
    out: dict[Comp, Fraction] = {}
    for (b, s), c in stmt.lhs_minus_rhs.terms.items():
        if weight(s) < n:
            out[s] = out.get(s, _ZERO) + c
    return {w: c for w, c in out.items() if c != 0}


def prove_weighted(
    stmt: CongruenceStatement, cache_dir: str | os.PathLike | None = None
) -> ProofCertificate:
    """Decide a weighted congruence by exact membership in the relation span.

    The zero statement (and any statement whose terms all have weight >= the
    modulus power) is proved with an empty combination.  Everything else is
    tested against :func:`generate_relations` at the statement's modulus
    power; the verdict is "proved" exactly when the coordinate vector is a
    Q-linear combination of generated relations.
    """
    coords = _statement_coords(stmt)
    if not coords:
        return ProofCertificate(stmt, (), "proved")
    combo = generate_relations(stmt.modulus_power, cache_dir).express(coords)
    if combo is None:
        return ProofCertificate(stmt, (), "unproven")
    combination = sorted(combo.items(), key=lambda it: it[0])
    return ProofCertificate(stmt, combination, "proved")


def prove_mixed(
    stmt: CongruenceStatement,
    n: int | None = None,
    cache_dir: str | os.PathLike | None = None,
) -> list[ProofCertificate]:
    """Prove a statement by per-offset decomposition into weighted parts.

    Each offset class ``k = weight(s) - b`` is rescaled by ``p^k`` and proved
    as a weighted congruence modulo ``p^(n + k)``; the conjunction of the
    parts implies the input statement.  Returns one certificate per part in
    ascending offset order (a single trivially proved certificate for the
    zero statement).  The input is proved iff every certificate is.
    """
    if n is not None and n != stmt.modulus_power:
        stmt = CongruenceStatement(stmt.lhs_minus_rhs, n)
    parts = decompose_weighted(stmt)
    if not parts:
        return [ProofCertificate(stmt, (), "proved")]
    return [
        prove_weighted(parts[k], cache_dir=cache_dir) for k in sorted(parts)
    ]


def all_proved(certs: Iterable[ProofCertificate]) -> bool:
    """True when every certificate in the collection is proved."""
    return all(cert.verdict == "proved" for cert in certs)


def prove_supercongruence(
    lhs: MhsSeries,
    rhs: MhsSeries,
    n: int,
    cache_dir: str | os.PathLike | None = None,
) -> list[ProofCertificate]:
    """Prove ``lhs == rhs (mod p^n)`` given series of order >= n.

    Both sides must be known at least to order ``n`` (exact series qualify);
    the difference is truncated to order ``n`` and handed to
    :func:`prove_mixed`.
    """
    if not isinstance(n, int) or n < 1:
        raise ValueError("modulus power n must be a positive int")
    for name, side in (("lhs", lhs), ("rhs", rhs)):
        if not isinstance(side, MhsSeries):
            raise TypeError(f"{name} must be an MhsSeries")
        if side.order is not None and side.order < n:
            raise ValueError(
                f"{name} is only known to O(p^{side.order}), cannot assert mod p^{n}"
            )
    diff = (lhs - rhs).truncate(n)
    return prove_mixed(CongruenceStatement(diff, n), cache_dir=cache_dir)


def provable_valuation(
    series: MhsSeries, cache_dir: str | os.PathLike | None = None
):
    """Largest n <= series.order such that the series provably vanishes mod p^n.

    Scans downward from the series order and returns the first power with a
    full per-offset proof (0 when even mod p is out of reach).  The exact
    zero series has no finite bound and returns INFINITY; other exact series
    are scanned upward until the first failure.
    """
    order = series.order
    if order is None:
        if series.is_zero():
            return INFINITY
        best = 0
        for n in range(1, EXACT_SCAN_LIMIT + 1):
            stmt = CongruenceStatement(series, n)
            if all_proved(prove_mixed(stmt, cache_dir=cache_dir)):
                best = n
            else:
                return best
        raise RuntimeError(
            f"provable valuation of an exact series exceeded {EXACT_SCAN_LIMIT}"
        )
    for n in range(order, 0, -1):
        stmt = CongruenceStatement(series.truncate(n), n)
        if all_proved(prove_mixed(stmt, cache_dir=cache_dir)):
            return n
    return 0


# -- certificate serialization and replay ----------------------------------


def replay_certificate(cert: ProofCertificate) -> bool:
    """Re-derive a proved certificate by pure arithmetic (no elimination).

    Regenerates every referenced relation from its (s, t, u) provenance at
    the target's modulus power, sums the exact combination, and compares it
    with the target's coordinate vector.  Unproven certificates never replay.
    """
    if cert.verdict != "proved":
        return False
    stmt = cert.target
    if stmt.modulus_power < 1:
        return True  # a congruence mod p^0 (or weaker) is vacuous
    target = _statement_coords(stmt)
    acc: dict[Comp, Fraction] = {}
    for (s, t, u), mult in cert.combination:
        _axpy(acc, _relation_coords(s, t, u, stmt.modulus_power), mult)
    return acc == target


def dump_certificates(certs: Sequence[ProofCertificate]) -> str:
    """Plain-text, machine-replayable form of a list of certificates.

    One part per certificate; each part states its modulus power, verdict,
    the rendered statement, the target coordinate vector, and one line per
    combination entry in the form ``<multiplier> * R[s=(..);t=(..);u=(..)]``.
    """
    lines = [
        f"padicmhs-certificate {CERTIFICATE_FORMAT_VERSION}",
        f"parts {len(certs)}",
    ]
    for i, cert in enumerate(certs, 1):
        stmt = cert.target
        lines.append(f"part {i}")
        lines.append(f"modulus {stmt.modulus_power}")
        lines.append(f"verdict {cert.verdict}")
        lines.append(
            f"statement {stmt.lhs_minus_rhs.render()} = 0 mod p^{stmt.modulus_power}"
        )
        coords = (
            sorted(_statement_coords(stmt).items(), key=lambda it: _col_key(it[0]))
            if stmt.modulus_power >= 1
            else []
        )
        lines.append(f"coords {len(coords)}")
        for w, c in coords:
            lines.append(f"c {format_comp(w)} {c}")
        lines.append(f"combination {len(cert.combination)}")
        for (s, t, u), mult in cert.combination:
            lines.append(
                f"{mult} * R[s={format_comp(s)};t={format_comp(t)};u={format_comp(u)}]"
            )
        lines.append("end part")
    lines.append("end certificate")
    return "\n".join(lines) + "\n"


_COMBO_LINE = re.compile(
    r"(-?\d+(?:/\d+)?)\s*\*\s*R\[s=(\([^)]*\));t=(\([^)]*\));u=(\([^)]*\))\]"
)


def _parse_certificate_parts(text: str) -> list[dict]:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    it = iter(lines)

    def expect(prefix: str) -> str:
        try:
            line = next(it)
        except StopIteration:
            raise ValueError(f"certificate text ended early, expected {prefix!r}")
        if not line.startswith(prefix):
            raise ValueError(f"expected {prefix!r}, got {line!r}")
        return line[len(prefix):].strip()

    version = expect("padicmhs-certificate")
    if version != str(CERTIFICATE_FORMAT_VERSION):
        raise ValueError(f"unsupported certificate format version {version!r}")
    nparts = int(expect("parts"))
    parts: list[dict] = []
    for i in range(1, nparts + 1):
        if expect("part") != str(i):
            raise ValueError(f"certificate parts out of order at part {i}")
        modulus = int(expect("modulus"))
        verdict = expect("verdict")
        if verdict not in ("proved", "unproven"):
            raise ValueError(f"unknown verdict {verdict!r}")
        expect("statement")  # informational; not machine-checked
        ncoords = int(expect("coords"))
        coords: dict[Comp, Fraction] = {}
        for _ in range(ncoords):
            body = expect("c ")
            field, _, value = body.rpartition(" ")
            coords[parse_comp(field)] = Fraction(value)
        ncombo = int(expect("combination"))
        combo: list[tuple[Prov, Fraction]] = []
        for _ in range(ncombo):
            try:
                line = next(it)
            except StopIteration:
                raise ValueError("certificate text ended inside a combination")
            m = _COMBO_LINE.fullmatch(line)
            if m is None:
                raise ValueError(f"malformed combination entry: {line!r}")
            prov = (
                parse_comp(m.group(2)),
                parse_comp(m.group(3)),
                parse_comp(m.group(4)),
            )
            combo.append((prov, Fraction(m.group(1))))
        if expect("end part") != "":
            raise ValueError(f"missing 'end part' after part {i}")
        parts.append(
            {"modulus": modulus, "verdict": verdict, "coords": coords, "combo": combo}
        )
    if expect("end certificate") != "":
        raise ValueError("trailing content after 'end certificate'")
    return parts


def verify_certificate_text(text: str) -> tuple[bool, str]:
    """Replay a dumped certificate arithmetically.

    Returns (ok, message).  Raises ValueError when the text is malformed.
    For every part: the verdict must be "proved", and the stated combination,
    with each relation regenerated from its provenance at the part's modulus
    power, must reproduce the stated target coordinates exactly.  Parts with
    modulus power < 1 are vacuously true.
    """
    parts = _parse_certificate_parts(text)
    for i, part in enumerate(parts, 1):
        if part["verdict"] != "proved":
            return False, f"part {i} has verdict {part['verdict']}"
        if part["modulus"] < 1:
            continue
        for (s, t, u), _ in part["combo"]:
            if weight(s) + weight(t) + weight(u) >= part["modulus"]:
                return False, (
                    f"part {i} references a relation outside modulus power "
                    f"{part['modulus']}"
                )
        acc: dict[Comp, Fraction] = {}
        for (s, t, u), mult in part["combo"]:
            _axpy(acc, _relation_coords(s, t, u, part["modulus"]), mult)
        if acc != part["coords"]:
            return False, f"part {i} combination does not reproduce its target"
    return True, f"replayed {len(parts)} part(s) exactly"
