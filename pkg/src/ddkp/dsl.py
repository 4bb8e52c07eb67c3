"""Expression DSL: parser, canonical and LaTeX printers, JSON schema.

Grammar::

    expr   := [ "+" | "-" ] term { ("+" | "-") term }
    term   := factor { "*" factor }
    factor := atom [ "^" uint ]
    atom   := rational | "x" | "n" | "u" [ "[" int "," uint "]" ]
            | "Theta" "(" expr ")" | "Dinv" "(" expr ")" | "Dx" "(" expr ")"
            | "S" [ "^" int ] "(" expr ")" | builtin | "(" expr ")"

``u`` alone is ``u[0,0]``; builtins are ``K G3 W M N H N2 UX``.
``print_canonical`` output always parses back to the same expression.
"""
from __future__ import annotations

import json
import re
from fractions import Fraction
from math import gcd

from . import syntax
from .algebra import N, X, ZERO, Atom, Expression, _term_order, apply_dinv, const, normalize, u
from .errors import DSLSyntaxError, SchemaError, SchemaVersionError

__all__ = [
    "parse",
    "parse_tree",
    "print_canonical",
    "print_latex",
    "to_json",
    "from_json",
    "expr_to_data",
    "expr_from_data",
    "SCHEMA_VERSION",
    "BUILTIN_NAMES",
]

BUILTIN_NAMES = ("K", "G3", "W", "M", "N", "H", "N2", "UX")
SCHEMA_VERSION = 1
_SCHEMA = "ddkp.expression"

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<sym>[-+*^()\[\],])|(?P<bad>\S))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        kind = m.lastgroup
        start = m.start(kind)
        value = m.group(kind)
        if kind == "bad":
            raise DSLSyntaxError(f"unexpected character {value!r}", text, start)
        if kind == "num" and "/" in value and int(value.split("/")[1]) == 0:
            raise DSLSyntaxError("zero denominator", text, start)
        tokens.append((kind, value, start))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def error(self, message, expected=()):
        raise DSLSyntaxError(message, self.text, self.tok[2], expected)

    def at(self, value) -> bool:
        kind, v, _ = self.tok
        return kind in ("sym", "name") and v == value

    def expect(self, value):
        if not self.at(value):
            got = self.tok[1] or "end of input"
            self.error(f"unexpected {got!r}", (value,))
        self.i += 1

    def parse(self):
        node = self.expr()
        if self.tok[0] != "eof":
            self.error(f"unexpected {self.tok[1]!r}", ("+", "-", "*", "^", "end of input"))
        return node

    def expr(self):
        negate = False
        if self.at("-") or self.at("+"):
            negate = self.tok[1] == "-"
            self.i += 1
        first = self.term()
        items = [syntax.Neg(first) if negate else first]
        while self.at("+") or self.at("-"):
            op = self.tok[1]
            self.i += 1
            t = self.term()
            items.append(syntax.Neg(t) if op == "-" else t)
        return items[0] if len(items) == 1 else syntax.Sum(tuple(items))

    def term(self):
        items = [self.factor()]
        while self.at("*"):
            self.i += 1
            items.append(self.factor())
        return items[0] if len(items) == 1 else syntax.Product(tuple(items))

    def factor(self):
        base = self.atom()
        if self.at("^"):
            self.i += 1
            return syntax.Power(base, self.uint("exponent"))
        return base

    def uint(self, what):
        kind, v, _ = self.tok
        if kind != "num" or "/" in v:
            self.error(f"{what} must be a non-negative integer", ("integer",))
        self.i += 1
        return int(v)

    def int_(self, what):
        sign = 1
        if self.at("-") or self.at("+"):
            sign = -1 if self.tok[1] == "-" else 1
            self.i += 1
        return sign * self.uint(what)

    def call_arg(self):
        self.expect("(")
        node = self.expr()
        self.expect(")")
        return node

    def atom(self):
        kind, v, _ = self.tok
        if kind == "num":
            self.i += 1
            return syntax.Num(Fraction(v))
        if kind == "sym" and v == "(":
            self.i += 1
            node = self.expr()
            self.expect(")")
            return node
        if kind == "name":
            if v in ("x", "n"):
                self.i += 1
                return syntax.Var(v)
            if v == "t":
                self.error("time symbol 't' is not allowed inside expressions")
            if v == "u":
                self.i += 1
                if self.at("["):
                    self.i += 1
                    m = self.int_("shift order")
                    self.expect(",")
                    if self.at("-"):
                        self.error("derivative order must be non-negative", ("integer",))
                    j = self.uint("derivative order")
                    self.expect("]")
                    return syntax.JetNode(m, j)
                return syntax.JetNode(0, 0)
            if v == "Theta":
                self.i += 1
                return syntax.Theta(self.call_arg())
            if v == "Dinv":
                self.i += 1
                return syntax.Dinv(self.call_arg())
            if v == "Dx":
                self.i += 1
                return syntax.Dx(self.call_arg())
            if v == "S":
                self.i += 1
                k = 1
                if self.at("^"):
                    self.i += 1
                    if self.at("("):
                        self.i += 1
                        k = self.int_("shift power")
                        self.expect(")")
                    else:
                        k = self.int_("shift power")
                return syntax.Shift(k, self.call_arg())
            if v in BUILTIN_NAMES:
                self.i += 1
                return syntax.Builtin(v)
            self.error(f"unknown name {v!r}")
        got = v or "end of input"
        self.error(
            f"unexpected {got!r}",
            ("number", "x", "n", "u", "Theta", "Dinv", "Dx", "S", "(", *BUILTIN_NAMES),
        )


def parse_tree(text: str) -> syntax.Node:
    """Parse DSL text into a raw (unnormalized) tree."""
    return _Parser(text).parse()


def parse(text: str) -> Expression:
    return normalize(parse_tree(text))


# -- canonical printer ---------------------------------------------------------


def _fmt_rational(c: Fraction) -> str:
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _pow(s: str, e: int) -> str:
    return s if e == 1 else f"{s}^{e}"


def _canonical_factors(key) -> list[str]:
    jets, atoms, xdeg, ndeg = key
    out = []
    if xdeg:
        out.append(_pow("x", xdeg))
    if ndeg:
        out.append(_pow("n", ndeg))
    for (m, j), e in jets:
        out.append(_pow("u" if (m, j) == (0, 0) else f"u[{m},{j}]", e))
    for atom, e in atoms:
        out.append(_pow(f"Dinv({print_canonical(atom.arg)})", e))
    return out


def print_canonical(e: Expression) -> str:
    if e.is_zero():
        return "0"
    pieces = []
    for key in sorted(e._d, key=_term_order):
        c = Fraction(e._d[key])
        factors = _canonical_factors(key)
        mag = abs(c)
        if not factors:
            body = _fmt_rational(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = "*".join([_fmt_rational(mag), *factors])
        if not pieces:
            pieces.append(("-" if c < 0 else "") + body)
        else:
            pieces.append((" - " if c < 0 else " + ") + body)
    return "".join(pieces)


# -- LaTeX printer -------------------------------------------------------------


def _latex_pow(s: str, e: int) -> str:
    if e == 1:
        return s
    return f"{s}^{e}" if e < 10 else f"{s}^{{{e}}}"


def _latex_jet(m: int, j: int) -> str:
    if m == 0:
        return "u" if j == 0 else "u_{" + "x" * j + "}"
    return f"u_{{{m},{j}}}"


def _x_antiderivative(arg: Expression):
    """A simple ``F`` with ``Dx F = arg``, or None."""
    if len(arg._d) != 1:
        return None
    (key, c), = arg._d.items()
    jets, atoms, xdeg, ndeg = key
    if xdeg or ndeg:
        return None
    if len(jets) == 1 and not atoms:
        (m, j), e = jets[0]
        if e == 1 and j >= 1:
            return Expression({((((m, j - 1), 1),), (), 0, 0): c})
        return None
    if not jets and len(atoms) == 1 and atoms[0][1] == 1:
        inner = _x_antiderivative(atoms[0][0].arg)
        if inner is not None and len(inner._d) == 1:
            (ikey, ic), = inner._d.items()
            if ikey[0] or any(a.u_dependent for a, _ in ikey[1]):
                inner_atom = Atom.of(Expression({ikey: 1}))
                return Expression({((), ((inner_atom, 1),), 0, 0): c * ic})
    return None


def _latex_atom(atom: Atom) -> str:
    anti = _x_antiderivative(atom.arg)
    if anti is not None:
        return r"\Theta(" + _latex_expr(anti) + ")"
    return r"(\mathcal{S}-1)^{-1}(" + _latex_expr(atom.arg) + ")"


def _latex_factors(key) -> str:
    jets, atoms, xdeg, ndeg = key
    out = []
    if xdeg:
        out.append(_latex_pow("x", xdeg))
    if ndeg:
        out.append(_latex_pow("n", ndeg))
    for (m, j), e in jets:
        out.append(_latex_pow(_latex_jet(m, j), e))
    for atom, e in atoms:
        out.append(_latex_pow(_latex_atom(atom), e))
    return "".join(out)


def _latex_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else rf"\frac{{{c.numerator}}}{{{c.denominator}}}"


def _latex_expr(e: Expression) -> str:
    if e.is_zero():
        return "0"
    out = []
    for key in sorted(e._d, key=_term_order):
        c = Fraction(e._d[key])
        body = _latex_factors(key)
        mag = abs(c)
        if not body:
            text = _latex_coeff(mag)
        elif mag == 1:
            text = body
        else:
            text = _latex_coeff(mag) + body
        sign = "-" if c < 0 else ("+" if out else "")
        out.append(sign + text)
    return "".join(out)


def _content(e: Expression) -> Fraction:
    """Positive or negative rational content of the coefficients."""
    coeffs = [Fraction(c) for c in e._d.values()]
    num = 0
    den = 1
    for c in coeffs:
        num = gcd(num, c.numerator)
        den = den * c.denominator // gcd(den, c.denominator)
    content = Fraction(num, den)
    if all(c < 0 for c in coeffs):
        content = -content
    return content


def print_latex(obj) -> str:
    """Math-mode LaTeX for an Expression or a TimePolynomial."""
    if isinstance(obj, Expression):
        return _latex_expr(obj)
    coefficients = getattr(obj, "coefficients", None)
    if coefficients is None:
        raise TypeError(f"cannot print {type(obj).__name__} as LaTeX")
    if not coefficients:
        return "0"
    out = []
    for k, coeff in coefficients:
        tpow = "" if k == 0 else ("t" if k == 1 else f"t^{k}" if k < 10 else f"t^{{{k}}}")
        if k == 0:
            piece = _latex_expr(coeff)
            out.append(f"({piece})" if len(coeff) > 1 else piece)
            continue
        content = _content(coeff)
        inner = _latex_expr(coeff.scale(1 / content))
        mag = abs(content)
        lead = "" if mag == 1 else _latex_coeff(mag)
        sign = "-" if content < 0 else ("+" if out else "")
        out.append(f"{sign}{lead}{tpow}({inner})")
    return "".join(out)


# -- JSON ----------------------------------------------------------------------


def expr_to_data(e: Expression) -> dict:
    terms = []
    for key in sorted(e._d, key=_term_order):
        jets, atoms, xdeg, ndeg = key
        terms.append(
            {
                "c": _fmt_rational(Fraction(e._d[key])),
                "x": xdeg,
                "n": ndeg,
                "u": [[m, j, p] for (m, j), p in jets],
                "dinv": [[expr_to_data(a.arg), p] for a, p in atoms],
            }
        )
    return {"terms": terms}


def _int(value, what, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{what} must be an integer")
    if minimum is not None and value < minimum:
        raise SchemaError(f"{what} must be >= {minimum}")
    return value


def expr_from_data(data) -> Expression:
    """Decode a term list; terms are rebuilt through the algebra, so the
    result is canonical even for hand-edited documents."""
    if not isinstance(data, dict) or not isinstance(data.get("terms"), list):
        raise SchemaError("expression node must be an object with a 'terms' list")
    out = ZERO
    for term in data["terms"]:
        if not isinstance(term, dict):
            raise SchemaError("term must be an object")
        try:
            c = Fraction(term["c"])
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise SchemaError(f"bad coefficient: {exc}") from None
        value = const(c.numerator if c.denominator == 1 else c)
        value = value * X ** _int(term.get("x", 0), "x degree", 0)
        value = value * N ** _int(term.get("n", 0), "n degree", 0)
        for item in term.get("u", []):
            if not isinstance(item, list) or len(item) != 3:
                raise SchemaError("jet must be [m, j, exponent]")
            m = _int(item[0], "shift order")
            j = _int(item[1], "derivative order", 0)
            value = value * u(m, j) ** _int(item[2], "jet exponent", 1)
        for item in term.get("dinv", []):
            if not isinstance(item, list) or len(item) != 2:
                raise SchemaError("atom must be [expression, exponent]")
            arg = expr_from_data(item[0])
            if arg.is_zero():
                raise SchemaError("atom argument must be nonzero")
            value = value * apply_dinv(arg) ** _int(item[1], "atom exponent", 1)
        out = out + value
    return out


def to_json(e: Expression) -> str:
    doc = {"schema": _SCHEMA, "version": SCHEMA_VERSION, "expr": expr_to_data(e)}
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def from_json(text: str) -> Expression:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed document: {exc}") from None
    if not isinstance(doc, dict) or doc.get("schema") != _SCHEMA:
        raise SchemaError("not a ddkp expression document")
    if doc.get("version") != SCHEMA_VERSION:
        raise SchemaVersionError(
            f"unsupported schema version {doc.get('version')!r} (expected {SCHEMA_VERSION})"
        )
    if "expr" not in doc:
        raise SchemaError("missing 'expr'")
    return expr_from_data(doc["expr"])
