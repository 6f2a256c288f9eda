"""Parsing of polynomial expressions and canonical printing of results.

Grammar accepted by :func:`parse_poly` (whitespace is insignificant)::

    expr     := term (('+' | '-') term)*
    term     := factor ('*' factor)*
    factor   := ('-' | '+') factor | base ('^' uint)?
    base     := rational | 'i' | 'x' uint | 't' | '(' expr ')'
    rational := int ('/' uint)?

Unary signs are accepted in front of any factor, so ``-x1^2`` means
``-(x1^2)``.  Anything outside this grammar (division by non-literals,
negative or fractional powers, function names) is rejected.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import List, Optional, Union

from .diffop import DiffOp, ExpPolyOp
from .exactnum import GQ, ONE, GaussianRational, Poly, as_rational, format_scalar, monomial_key

__all__ = [
    "ParseError",
    "Num",
    "Imag",
    "Var",
    "BinOp",
    "Neg",
    "Pow",
    "parse_expr",
    "parse_poly",
    "evaluate",
    "format_poly",
    "format_operator",
    "scalar_to_json",
    "scalar_from_json",
    "poly_to_json",
    "poly_from_json",
    "operator_to_json",
    "operator_from_json",
    "format_json",
]


class ParseError(ValueError):
    """Malformed or non-polynomial input; ``pos`` is a 0-based character offset."""

    def __init__(self, message: str, pos: int, src: str = ""):
        self.pos = pos
        self.src = src
        super().__init__(f"{message} (at position {pos})")

    def pointer(self) -> str:
        """The source line with a caret under the offending position."""
        return f"{self.src}\n{' ' * self.pos}^"


# -- AST -------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: object  # exact rational


@dataclass(frozen=True)
class Imag:
    pass


@dataclass(frozen=True)
class Var:
    name: str  # "t" or "x<k>" with k 1-based
    index: Optional[int]  # 0-based space index, None for t


@dataclass(frozen=True)
class BinOp:
    op: str  # '+', '-', '*'
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


Node = Union[Num, Imag, Var, BinOp, Neg, Pow]


# -- tokenizer ---------------------------------------------------------------

_TOKEN = re.compile(r"(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.)")


@dataclass
class _Tok:
    kind: str  # 'int', 'name', 'op', 'end'
    text: str
    pos: int


def _tokenize(src: str) -> List[_Tok]:
    toks = []
    pos = 0
    while pos < len(src):
        if src[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(src, pos)
        if m.group(1):
            toks.append(_Tok("int", m.group(1), pos))
        elif m.group(2):
            toks.append(_Tok("name", m.group(2), pos))
        else:
            ch = m.group(3)
            if ch not in "+-*/^()":
                raise ParseError(f"unexpected character {ch!r}", pos, src)
            toks.append(_Tok("op", ch, pos))
        pos = m.end()
    toks.append(_Tok("end", "", len(src)))
    return toks


class _Parser:
    def __init__(self, src: str, n: int):
        self.src = src
        self.n = n
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, message: str, tok: Optional[_Tok] = None):
        tok = tok or self.peek()
        raise ParseError(message, tok.pos, self.src)

    def expect(self, text: str):
        tok = self.next()
        if tok.text != text:
            self.fail(f"expected {text!r}", tok)

    def parse(self) -> Node:
        if self.peek().kind == "end":
            self.fail("empty expression")
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            if tok.text == "/":
                self.fail("division is only allowed inside a rational literal such as 3/4; "
                          "rational functions are not polynomial potentials", tok)
            self.fail(f"unexpected {tok.text!r}", tok)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek().text in ("+", "-"):
            op = self.next().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek().text == "*":
            self.next()
            node = BinOp("*", node, self.factor())
        return node

    def factor(self) -> Node:
        tok = self.peek()
        if tok.text == "-":
            self.next()
            return Neg(self.factor())
        if tok.text == "+":
            self.next()
            return self.factor()
        base = self.base()
        if self.peek().text == "^":
            self.next()
            etok = self.peek()
            if etok.text in ("-", "("):
                self.fail("exponent must be a nonnegative integer literal", etok)
            if etok.kind != "int":
                self.fail("expected integer exponent", etok)
            self.next()
            if self.peek().text == "/":
                self.fail("fractional exponents are not allowed", self.peek())
            return Pow(base, int(etok.text))
        return base

    def base(self) -> Node:
        tok = self.next()
        if tok.kind == "int":
            if self.peek().text == "/":
                slash = self.next()
                den = self.next()
                if den.kind != "int":
                    self.fail("expected integer denominator after '/'", den if den.kind != "end" else slash)
                if int(den.text) == 0:
                    self.fail("zero denominator", den)
                return Num(as_rational(f"{tok.text}/{den.text}"))
            return Num(as_rational(int(tok.text)))
        if tok.kind == "name":
            name = tok.text
            if name == "i":
                return Imag()
            if name == "t":
                return Var("t", None)
            m = re.fullmatch(r"x(\d+)", name)
            if m:
                k = int(m.group(1))
                if k < 1 or k > self.n:
                    self.fail(f"variable {name} out of range for n={self.n}", tok)
                return Var(name, k - 1)
            self.fail(f"unknown identifier {name!r}; only polynomials in x1..x{self.n}, t and i are accepted", tok)
        if tok.text == "(":
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "end":
            self.fail("unexpected end of input", tok)
        self.fail(f"unexpected {tok.text!r}", tok)


def parse_expr(src: str, n: int) -> Node:
    return _Parser(src, n).parse()


def evaluate(node: Node, n: int) -> Poly:
    if isinstance(node, Num):
        return Poly.const(n, node.value)
    if isinstance(node, Imag):
        return Poly.const(n, GQ(0, 1))
    if isinstance(node, Var):
        return Poly.time(n) if node.index is None else Poly.var(n, node.index)
    if isinstance(node, Neg):
        return -evaluate(node.operand, n)
    if isinstance(node, Pow):
        return evaluate(node.base, n) ** node.exponent
    if isinstance(node, BinOp):
        a, b = evaluate(node.left, n), evaluate(node.right, n)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        return a * b
    raise TypeError(f"unknown node {node!r}")


def parse_poly(src: str, n: int) -> Poly:
    """Parse ``src`` into an expanded polynomial in ``x1..xn, t``."""
    if not src or not src.strip():
        raise ParseError("empty expression", 0, src or "")
    return evaluate(parse_expr(src, n), n)


# -- printing ------------------------------------------------------------------


def _format_monomial(m) -> str:
    parts = []
    for a, e in enumerate(m[:-1]):
        if e:
            parts.append(f"x{a + 1}" if e == 1 else f"x{a + 1}^{e}")
    if m[-1]:
        parts.append("t" if m[-1] == 1 else f"t^{m[-1]}")
    return "*".join(parts)


def _join_signed(parts: List[str]) -> str:
    out = parts[0]
    for p in parts[1:]:
        out += " - " + p[1:] if p.startswith("-") else " + " + p
    return out


def format_poly(p: Poly) -> str:
    """Canonical text for ``p`` (graded-lex descending); parseable by :func:`parse_poly`."""
    if p.is_zero():
        return "0"
    parts = []
    for m, c in p.sorted_terms():
        mono = _format_monomial(m)
        if not mono:
            parts.append(format_scalar(c))
        elif c == 1:
            parts.append(mono)
        elif c == -1:
            parts.append("-" + mono)
        else:
            parts.append(f"{format_scalar(c)}*{mono}")
    return _join_signed(parts)


def _format_diffop(op: DiffOp) -> str:
    parts = []
    if op.dt:
        parts.append(f"({format_scalar(op.dt)})*dt")
    for alpha, c in op.sorted_terms():
        ds = "*".join(f"d{a + 1}" if k == 1 else f"d{a + 1}^{k}" for a, k in enumerate(alpha) if k)
        parts.append(f"({format_poly(c)})*{ds}" if ds else f"({format_poly(c)})")
    return " + ".join(parts) if parts else "0"


def format_operator(op: Union[DiffOp, ExpPolyOp]) -> str:
    """Deterministic text for an operator; derivatives print as ``d1..dn``."""
    if isinstance(op, DiffOp):
        return _format_diffop(op)
    if op.is_zero():
        return "0"
    parts = []
    for lam, branch in op.sorted_branches():
        body = _format_diffop(branch)
        if lam:
            rate = format_poly(Poly.time(op.n).scale(lam))
            parts.append(f"exp({rate})*({body})")
        else:
            parts.append(body)
    return " + ".join(parts)


# -- JSON --------------------------------------------------------------------


def _q_str(q) -> str:
    return f"{q.numerator}/{q.denominator}"


def scalar_to_json(z: GaussianRational) -> dict:
    return {"re": _q_str(z.re), "im": _q_str(z.im)}


def scalar_from_json(d: dict) -> GaussianRational:
    return GQ(as_rational(d["re"]), as_rational(d["im"]))


def poly_to_json(p: Poly) -> list:
    return [
        {"exps": list(m[:-1]), "t_exp": m[-1], **scalar_to_json(c)}
        for m, c in p.sorted_terms()
    ]


def poly_from_json(terms: list, n: int) -> Poly:
    return Poly(n, {tuple(t["exps"]) + (t["t_exp"],): scalar_from_json(t) for t in terms})


def _diffop_branch(op: DiffOp, lam: GaussianRational) -> dict:
    branch = {
        "lambda": scalar_to_json(lam),
        "terms": [{"deriv": list(a), "coeff": poly_to_json(c)} for a, c in op.sorted_terms()],
    }
    if op.dt:
        branch["dt"] = scalar_to_json(op.dt)
    return branch


def operator_to_json(op: Union[DiffOp, ExpPolyOp]) -> dict:
    """``{"branches": [{"lambda": {...}, "terms": [{"deriv": [...], "coeff": [...]}]}]}``."""
    if isinstance(op, DiffOp):
        return {"branches": [_diffop_branch(op, GQ(0))] if not op.is_zero() else []}
    return {"branches": [_diffop_branch(b, lam) for lam, b in op.sorted_branches()]}


def operator_from_json(d: dict, n: int) -> ExpPolyOp:
    branches = {}
    for b in d["branches"]:
        terms = {tuple(t["deriv"]): poly_from_json(t["coeff"], n) for t in b["terms"]}
        dt = scalar_from_json(b["dt"]) if "dt" in b else 0
        branches[scalar_from_json(b["lambda"])] = DiffOp(n, terms, dt)
    return ExpPolyOp(n, branches)


def format_json(result) -> str:
    """Serialize a report dictionary (already JSON-ready) deterministically."""
    return json.dumps(result, indent=2, ensure_ascii=False) + "\n"
