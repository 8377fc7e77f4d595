"""Command-line front end for the p-adic MHS engine.

Subcommands:

* ``expand``  — evaluate an expression in the truncated series algebra and
  print its canonical rendering;
* ``valuation`` — print a proved lower bound for the p-adic valuation of an
  expression (the working order when the series is identically zero);
* ``prove`` — decide a congruence by exact reduction against generated
  double-shuffle relations; emits a replayable certificate; exit code 0
  when proved, 1 when not, 2 on errors;
* ``verify`` — evaluate a congruence at every prime of a window with the
  exact-rational oracle and print a PASS/FAIL table;
* ``identities`` — generate and dump the relation basis at a modulus;
* ``verify-certificate`` — arithmetically replay a dumped certificate.

Expression grammar (ASCII, whitespace-insensitive)::

    statement := expr [ "=" expr "mod" "p" "^" INT ]
    expr      := term (("+" | "-") term)*
    term      := factor ("*" factor)*
    factor    := ["+" | "-"] atom
    atom      := INT [ "/" INT ]          rational literal
               | "p" [ "^" SINT ]         power of the prime
               | "H" "(" parts ")"        multiple harmonic sum H_{p-1}(s)
               | "inv" "(" expr ")"       inverse of a unit series
               | NAME "(" args ")"        named quantity (binp, apery, ...)
               | "(" expr ")"

``prove`` and ``verify`` accept either an inline congruence or a path to a
statement file (one congruence per line, ``#`` comments).  Quantity atoms
inside congruences are expanded at the congruence's modulus power unless
``--order`` asks for more.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import __version__
from .arith import INFINITY
from .expansions import expand_quantity
from .oracle import DEFAULT_WORK_BUDGET, PrimeWindow, check_numeric
from .prover import (
    dump_certificates,
    generate_relations,
    prove_supercongruence,
    provable_valuation,
    verify_certificate_text,
)
from .quantities import QUANTITY_NAMES, parse_quantity
from .series import CongruenceStatement, MhsSeries

__all__ = [
    "ExprAst",
    "ExprSyntaxError",
    "eval_series",
    "eval_statement",
    "main",
    "parse",
]

KNOWN_QUANTITIES = tuple(sorted(QUANTITY_NAMES))


class ExprSyntaxError(ValueError):
    """Syntax error in an expression, with a character position."""

    def __init__(self, message: str, pos: int) -> None:
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


@dataclass(frozen=True)
class ExprAst:
    """Expression tree node.

    ``kind`` is one of ``lit`` (payload: Fraction), ``p`` (payload: int
    exponent), ``H`` (payload: composition), ``quantity`` (payload:
    QuantitySpec), ``add``/``sub``/``mul`` (two children), ``neg``/``inv``
    (one child), or ``cong`` (payload: modulus power, children: lhs, rhs).
    """

    kind: str
    payload: object = None
    children: tuple["ExprAst", ...] = ()


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.i = 0

    # -- low-level scanning -------------------------------------------------

    def _ws(self) -> None:
        while self.i < len(self.text) and self.text[self.i].isspace():
            self.i += 1

    def peek(self) -> str:
        self._ws()
        return self.text[self.i] if self.i < len(self.text) else ""

    def take(self, ch: str) -> bool:
        if self.peek() == ch:
            self.i += 1
            return True
        return False

    def expect(self, ch: str) -> None:
        if not self.take(ch):
            raise ExprSyntaxError(f"expected {ch!r}", self.i)

    def _int(self) -> int:
        self._ws()
        start = self.i
        while self.i < len(self.text) and self.text[self.i].isdigit():
            self.i += 1
        if self.i == start:
            raise ExprSyntaxError("expected an integer", start)
        return int(self.text[start : self.i])

    def _signed_int(self) -> int:
        self._ws()
        sign = 1
        if self.take("-"):
            sign = -1
        elif self.take("+"):
            pass
        return sign * self._int()

    def _name(self) -> str:
        self._ws()
        start = self.i
        while self.i < len(self.text) and (
            self.text[self.i].isalnum() or self.text[self.i] == "_"
        ):
            self.i += 1
        return self.text[start : self.i]

    def _balanced(self) -> str:
        """Consume '( ... )' with nesting and return the inner text."""
        self.expect("(")
        start = self.i
        depth = 1
        while self.i < len(self.text):
            c = self.text[self.i]
            if c == "(":
                depth += 1
            elif c == ")":
                depth -= 1
                if depth == 0:
                    inner = self.text[start : self.i]
                    self.i += 1
                    return inner
            self.i += 1
        raise ExprSyntaxError("unbalanced parenthesis", start - 1)

    # -- grammar -------------------------------------------------------------

    def parse_statement(self) -> ExprAst:
        lhs = self.parse_expression()
        if self.peek() == "=":
            self.i += 1
            rhs = self.parse_expression()
            self._ws()
            pos = self.i
            if self._name() != "mod":
                raise ExprSyntaxError("expected 'mod'", pos)
            self._ws()
            pos = self.i
            if self._name() != "p":
                raise ExprSyntaxError("expected 'p' after 'mod'", pos)
            self.expect("^")
            n = self._signed_int()
            node = ExprAst("cong", n, (lhs, rhs))
        else:
            node = lhs
        self._ws()
        if self.i != len(self.text):
            raise ExprSyntaxError("trailing input", self.i)
        return node

    def parse_expression(self) -> ExprAst:
        node = self.parse_term()
        while True:
            c = self.peek()
            if c == "+":
                self.i += 1
                node = ExprAst("add", None, (node, self.parse_term()))
            elif c == "-":
                self.i += 1
                node = ExprAst("sub", None, (node, self.parse_term()))
            else:
                return node

    def parse_term(self) -> ExprAst:
        node = self.parse_factor()
        while self.peek() == "*":
            self.i += 1
            node = ExprAst("mul", None, (node, self.parse_factor()))
        return node

    def parse_factor(self) -> ExprAst:
        if self.take("-"):
            return ExprAst("neg", None, (self.parse_factor(),))
        if self.take("+"):
            return self.parse_factor()
        return self.parse_atom()

    def parse_atom(self) -> ExprAst:
        c = self.peek()
        pos = self.i
        if c == "(":
            self.i += 1
            node = self.parse_expression()
            self.expect(")")
            return node
        if c.isdigit():
            num = self._int()
            save = self.i
            if self.take("/"):
                if self.peek().isdigit():
                    den = self._int()
                    if den == 0:
                        raise ExprSyntaxError("division by zero in literal", save)
                    return ExprAst("lit", Fraction(num, den))
                self.i = save  # not a rational literal
            return ExprAst("lit", Fraction(num))
        name = self._name()
        if not name:
            raise ExprSyntaxError("expected an atom", pos)
        if name == "p":
            if self.take("^"):
                return ExprAst("p", self._signed_int())
            return ExprAst("p", 1)
        if name == "H":
            inner = self._balanced()
            parts = []
            for piece in inner.split(",") if inner.strip() else []:
                piece = piece.strip()
                if not piece.isdigit() or int(piece) < 1:
                    raise ExprSyntaxError(
                        f"H parts must be positive integers, got {piece!r}", pos
                    )
                parts.append(int(piece))
            return ExprAst("H", tuple(parts))
        if name == "inv":
            self.expect("(")
            node = self.parse_expression()
            self.expect(")")
            return ExprAst("inv", None, (node,))
        if name in KNOWN_QUANTITIES:
            inner = self._balanced()
            try:
                spec = parse_quantity(name, inner)
            except ValueError as exc:
                raise ExprSyntaxError(str(exc), pos) from exc
            return ExprAst("quantity", spec)
        raise ExprSyntaxError(
            f"unknown atom {name!r}; known atoms: p, H, inv, "
            + ", ".join(KNOWN_QUANTITIES),
            pos,
        )


def parse(text: str) -> ExprAst:
    """Parse an expression or congruence statement."""
    return _Parser(text).parse_statement()


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def eval_series(ast: ExprAst, order: int, cache_dir=None) -> MhsSeries:
    """Evaluate an expression node in the series algebra at ``order``."""
    kind = ast.kind
    if kind == "lit":
        return MhsSeries.constant(ast.payload, None)
    if kind == "p":
        return MhsSeries.term(1, ast.payload, (), None)
    if kind == "H":
        return MhsSeries.term(1, 0, ast.payload, None)
    if kind == "quantity":
        return expand_quantity(ast.payload, order, cache_dir=cache_dir)
    if kind == "add":
        return eval_series(ast.children[0], order, cache_dir) + eval_series(
            ast.children[1], order, cache_dir
        )
    if kind == "sub":
        return eval_series(ast.children[0], order, cache_dir) - eval_series(
            ast.children[1], order, cache_dir
        )
    if kind == "mul":
        return eval_series(ast.children[0], order, cache_dir) * eval_series(
            ast.children[1], order, cache_dir
        )
    if kind == "neg":
        return eval_series(ast.children[0], order, cache_dir).scale(-1)
    if kind == "inv":
        s = eval_series(ast.children[0], order, cache_dir)
        if s.order is None and any(key != (0, ()) for key in s.terms):
            s = s.truncate(order)  # exact units may have infinite inverses
        return s.invert_unit()
    if kind == "cong":
        raise ValueError("a congruence is a statement, not a series expression")
    raise ValueError(f"unknown AST node {kind!r}")


def eval_statement(
    ast: ExprAst, cache_dir=None, order: int | None = None
) -> tuple[MhsSeries, MhsSeries, int]:
    """Evaluate a congruence node: (lhs series, rhs series, modulus power).

    Quantity atoms are expanded at the modulus power, or at ``order`` when
    that is larger.
    """
    if ast.kind != "cong":
        raise ValueError("expected a congruence '<expr> = <expr> mod p^<n>'")
    n = ast.payload
    work = n if order is None else max(n, order)
    lhs = eval_series(ast.children[0], work, cache_dir)
    rhs = eval_series(ast.children[1], work, cache_dir)
    return lhs, rhs, n


# ---------------------------------------------------------------------------
# command implementations
# ---------------------------------------------------------------------------


def _load_statements(arg: str) -> list[str]:
    """Inline congruence text, or the lines of a statement file."""
    if os.path.isfile(arg):
        lines = []
        with open(arg, "r", encoding="ascii") as fh:
            for raw in fh:
                line = raw.strip()
                if line and not line.startswith("#"):
                    lines.append(line)
        if not lines:
            raise ValueError(f"statement file {arg!r} contains no statements")
        return lines
    return [arg]


def _parse_window(text: str) -> PrimeWindow:
    lo, sep, hi = text.partition("..")
    if not sep or not lo.isdigit() or not hi.isdigit():
        raise ValueError(f"--primes expects 'lo..hi', got {text!r}")
    return PrimeWindow(int(lo), int(hi))


DEFAULT_ORDER = 8


def cmd_expand(args) -> int:
    ast = parse(args.expr)
    if ast.kind == "cong":
        raise ValueError("expand takes an expression; use prove/verify for congruences")
    order = DEFAULT_ORDER if args.order is None else args.order
    series = eval_series(ast, order, args.cache_dir)
    print(series.render())
    return 0


def cmd_valuation(args) -> int:
    ast = parse(args.expr)
    if ast.kind == "cong":
        raise ValueError("valuation takes an expression, not a congruence")
    order = DEFAULT_ORDER if args.order is None else args.order
    series = eval_series(ast, order, args.cache_dir)
    v = provable_valuation(series, cache_dir=args.cache_dir)
    if v is INFINITY:
        # identically-zero (or indistinguishable-from-zero) series: provable
        # to the full working order
        print(order if series.order is None else series.order)
    else:
        print(v)
    return 0


def cmd_prove(args) -> int:
    statements = _load_statements(args.congruence)
    all_proved = True
    dumps: list[str] = []
    for text in statements:
        lhs, rhs, n = eval_statement(parse(text), args.cache_dir, args.order)
        certs = prove_supercongruence(lhs, rhs, n, cache_dir=args.cache_dir)
        proved = bool(certs) and all(c.proved for c in certs)
        all_proved = all_proved and proved
        print(f"{'PROVED' if proved else 'UNPROVEN'}: {text}")
        for cert in certs:
            state = cert.verdict
            print(
                f"  part modulus p^{cert.target.modulus_power}: {state}"
                f" ({len(cert.combination)} relation(s))"
            )
        if proved:
            dumps.append(dump_certificates(certs))
    if args.dump:
        with open(args.dump, "w", encoding="ascii") as fh:
            fh.write("".join(dumps))
        print(f"certificates written to {args.dump}")
    elif dumps and args.show_certificates:
        print("".join(dumps), end="")
    return 0 if all_proved else 1


def cmd_verify(args) -> int:
    statements = _load_statements(args.congruence)
    ok = True
    for text in statements:
        lhs, rhs, n = eval_statement(parse(text), args.cache_dir, args.order)
        stmt = CongruenceStatement(lhs - rhs, n)
        report = check_numeric(stmt, args.primes, work_budget=args.work_budget)
        print(f"verify: {text}")
        print(report.render())
        ok = ok and report.passed
    return 0 if ok else 1


def cmd_identities(args) -> int:
    basis = generate_relations(args.modulus, cache_dir=args.cache_dir)
    print(
        f"relation basis at modulus p^{args.modulus}: "
        f"rank {basis.rank} over {len(basis.columns)} compositions"
    )
    if args.dump:
        with open(args.dump, "w", encoding="ascii") as fh:
            fh.write(basis.dump())
        print(f"basis written to {args.dump}")
    else:
        print(basis.dump(), end="")
    return 0


def cmd_verify_certificate(args) -> int:
    with open(args.path, "r", encoding="ascii") as fh:
        text = fh.read()
    ok, message = verify_certificate_text(text)
    print(message)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--order",
        type=int,
        default=None,
        help="truncation order for series evaluation (default 8 for "
        "expand/valuation; congruence statements evaluate at their modulus "
        "power unless --order asks for more)",
    )
    common.add_argument(
        "--cache-dir",
        default=None,
        help="directory for cached relation bases (default: PADICMHS_CACHE_DIR "
        "or a user cache directory)",
    )
    common.add_argument(
        "--primes",
        type=_parse_window,
        default=None,
        help="prime window lo..hi for numeric checks (default 11..97)",
    )
    common.add_argument(
        "--work-budget",
        type=int,
        default=DEFAULT_WORK_BUDGET,
        help="oracle work budget in summation steps",
    )

    parser = argparse.ArgumentParser(
        prog="padicmhs",
        description="Expand prime-indexed quantities into p-adic series of "
        "multiple harmonic sums, prove supercongruences against generated "
        "double-shuffle relations, and verify them numerically.",
    )
    parser.add_argument(
        "--version", action="version", version=f"padicmhs {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("expand", parents=[common], help="expand an expression")
    p.add_argument("expr")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser(
        "valuation", parents=[common], help="proved valuation lower bound"
    )
    p.add_argument("expr")
    p.set_defaults(func=cmd_valuation)

    p = sub.add_parser(
        "prove", parents=[common], help="prove a congruence symbolically"
    )
    p.add_argument("congruence", help="inline congruence or statement file")
    p.add_argument("--dump", default=None, help="write certificates to a file")
    p.add_argument(
        "--show-certificates",
        action="store_true",
        help="print certificate text after the verdicts",
    )
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser(
        "verify", parents=[common], help="check a congruence numerically"
    )
    p.add_argument("congruence", help="inline congruence or statement file")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser(
        "identities", parents=[common], help="generate and dump a relation basis"
    )
    p.add_argument("--modulus", type=int, required=True, help="modulus power n")
    p.add_argument("--dump", default=None, help="write the basis to a file")
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser(
        "verify-certificate",
        parents=[common],
        help="arithmetically replay a certificate file",
    )
    p.add_argument("path")
    p.set_defaults(func=cmd_verify_certificate)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "primes", None) is None:
        args.primes = PrimeWindow()
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
