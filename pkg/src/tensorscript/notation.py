"""Lexer and parser for the TeX-like expression language and for statements.

Expressions::

    F_{\\mu\\nu} = \\partial_{\\mu}{A_{\\nu}} - \\partial_{\\nu}{A_{\\mu}}
    -1/4 \\int{ F_{\\mu\\nu} F^{\\mu\\nu} }{x}

Statements end in ``;`` (show the result) or ``.`` (stay quiet)::

    {\\mu,\\nu,\\rho}::Indices(position=free).
    S:= -1/4 \\int{F_{\\mu\\nu} F^{\\mu\\nu}}{x};
    vary(S, $A_{\\mu} -> \\delta{A_{\\mu}}$);
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import expr as ex
from .errors import ParseError
from .printing import GREEK, print_latex, print_plain  # noqa: F401  (re-export)
from .properties import Property

_SKIPPED_COMMANDS = {"left", "right", "quad", "qquad"}
_SINGLE = set("_^{}()[]+-*/=,#$;.:")
_MULTI = ("**", "->", ":=", "::")


@dataclass(frozen=True)
class Token:
    kind: str      # num ident cmd op str eof
    text: str
    line: int
    col: int


def tokenize(text: str, line0: int = 1) -> list:
    toks = []
    i, line, col = 0, line0, 1
    n = len(text)

    def advance(k):
        nonlocal i, line, col
        for ch in text[i:i + k]:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        i += k

    while i < n:
        ch = text[i]
        if ch.isspace():
            advance(1)
            continue
        start_line, start_col = line, col
        if ch == "\\":
            m = re.match(r"\\([A-Za-z]+)", text[i:])
            if m:
                name = m.group(1)
                advance(len(m.group(0)))
                if name in _SKIPPED_COMMANDS:
                    continue
                if name == "cdot":
                    toks.append(Token("op", "*", start_line, start_col))
                else:
                    toks.append(Token("cmd", name, start_line, start_col))
                continue
            nxt = text[i + 1:i + 2]
            if nxt in ("{", "}"):
                toks.append(Token("op", nxt, start_line, start_col))
                advance(2)
                continue
            if nxt in (",", ";", "!", " ", ":"):
                advance(2)
                continue
            raise ParseError(f"stray backslash before {nxt!r}", line, col)
        if ch.isdigit():
            m = re.match(r"\d+", text[i:])
            toks.append(Token("num", m.group(0), start_line, start_col))
            advance(len(m.group(0)))
            continue
        if ch.isalpha():
            m = re.match(r"[A-Za-z]+", text[i:])
            toks.append(Token("ident", m.group(0), start_line, start_col))
            advance(len(m.group(0)))
            continue
        if ch == '"':
            j = text.find('"', i + 1)
            if j < 0:
                raise ParseError("unterminated string", line, col)
            toks.append(Token("str", text[i + 1:j], start_line, start_col))
            advance(j + 1 - i)
            continue
        two = text[i:i + 2]
        if two in _MULTI:
            toks.append(Token("op", two, start_line, start_col))
            advance(2)
            continue
        if ch in _SINGLE:
            toks.append(Token("op", ch, start_line, start_col))
            advance(1)
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, text: str, line0: int = 1):
        self.toks = tokenize(text, line0)
        self.pos = 0

    # -- token helpers -----------------------------------------------------

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.peek()
        self.pos += 1
        return t

    def at(self, text: str, k: int = 0) -> bool:
        t = self.peek(k)
        return t.kind == "op" and t.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}")
        return self.next()

    def fail(self, msg: str, tok: Token = None):
        tok = tok or self.peek()
        got = tok.text or "end of input"
        raise ParseError(f"{msg}, got {got!r}", tok.line, tok.col)

    def starts_atom(self, t: Token) -> bool:
        return t.kind in ("num", "ident", "cmd") or (t.kind == "op" and t.text in "({[#")

    # -- grammar -----------------------------------------------------------

    def parse(self) -> ex.Expr:
        e = self.rule_level()
        if self.peek().kind != "eof":
            self.fail("unexpected trailing input")
        return e

    def rule_level(self):
        a = self.eq_level()
        if self.at("->"):
            self.next()
            return ex.rule(a, self.eq_level())
        return a

    def eq_level(self):
        a = self.sum_level()
        if self.at("="):
            self.next()
            return _make_equation(a, self.sum_level())
        return a

    def sum_level(self):
        terms = []
        sign = 1
        if self.at("-") or self.at("+"):
            sign = -1 if self.next().text == "-" else 1
        terms.append(self._signed(self.term(), sign))
        while self.at("+") or self.at("-"):
            sign = -1 if self.next().text == "-" else 1
            terms.append(self._signed(self.term(), sign))
        return ex.add(*terms)

    @staticmethod
    def _signed(t, sign):
        return ex.neg(t) if sign < 0 else t

    def term(self):
        factors = [self.power_item()]
        while True:
            if self.at("*"):
                self.next()
                factors.append(self.power_item())
            elif self.at("/"):
                self.next()
                factors.append(ex.power(self.power_item(), -1))
            elif self.starts_atom(self.peek()):
                factors.append(self.power_item())
            else:
                break
        return ex.mul(*factors)

    def power_item(self):
        b = self.atom()
        while True:
            if self.at("**"):
                self.next()
                b = ex.power(b, self.exponent_atom())
            elif self.at("^") and self.power_superscript():
                self.next()
                b = ex.power(b, self.superscript_exponent())
            else:
                return b

    def power_superscript(self) -> bool:
        t = self.peek(1)
        if t.kind == "num" or (t.kind == "op" and t.text == "-"):
            return True
        if t.kind == "op" and t.text == "{":
            u = self.peek(2)
            return u.kind == "num" or (u.kind == "op" and u.text in ("-", "(")) \
                or (u.kind == "cmd" and u.text == "frac")
        return False

    def superscript_exponent(self):
        if self.at("{"):
            self.next()
            e = self.sum_level()
            self.expect("}")
            return e
        if self.at("-"):
            self.next()
            return ex.neg(ex.num(int(self.next().text)))
        return ex.num(int(self.next().text))

    def exponent_atom(self):
        if self.at("-"):
            self.next()
            return ex.neg(self.exponent_atom())
        return self.atom()

    def index_groups(self) -> list:
        idx = []
        while self.at("_") or (self.at("^") and not self.power_superscript()):
            up = self.next().text == "^"
            if self.at("{"):
                self.next()
                names = []
                while not self.at("}"):
                    t = self.next()
                    if t.kind not in ("cmd", "ident", "num"):
                        self.fail("expected an index name", t)
                    names.append(t.text)
                self.next()
                if not names:
                    self.fail("empty index group")
            else:
                t = self.peek()
                if t.kind not in ("cmd", "ident", "num"):
                    self.fail(f"bare {'^' if up else '_'} without operand")
                names = [self.next().text]
            idx.extend(ex.Index(n, up) for n in names)
        return idx

    def brace_content(self, open_="{", close="}", force_list=False):
        self.expect(open_)
        items, comma = [], force_list
        if self.at(close):
            self.next()
            return ex.lst([])
        items.append(self.rule_level())
        while self.at(","):
            self.next()
            comma = True
            if self.at(close):
                break
            items.append(self.rule_level())
        self.expect(close)
        return ex.lst(items) if comma else items[0]

    def group(self):
        """``{expr}`` or ``(expr)``."""
        if self.at("("):
            self.next()
            e = self.rule_level()
            self.expect(")")
            return e
        if self.at("{"):
            self.next()
            e = self.rule_level()
            self.expect("}")
            return e
        self.fail("expected a braced or parenthesised group")

    def operand(self):
        if self.at("{") or self.at("("):
            return self.group()
        return self.atom()

    def atom(self):
        t = self.peek()
        if t.kind == "num":
            self.next()
            return ex.num(int(t.text))
        if t.kind == "ident":
            self.next()
            if t.text in ex.SCALAR_FUNCTIONS and self.at("("):
                return ex.fn(t.text, self.group())
            return ex.sym(t.text, self.index_groups())
        if t.kind == "cmd":
            return self.command()
        if t.kind == "op":
            if t.text == "(":
                return self.group()
            if t.text == "{":
                return self.brace_content()
            if t.text == "[":
                return self.brace_content("[", "]", force_list=True)
            if t.text == "#":
                self.next()
                return ex.wild()
            if t.text in ("^", "_"):
                self.fail(f"bare {t.text} without operand")
        self.fail("unexpected token")

    def command(self):
        t = self.next()
        name = t.text
        if name == "partial":
            idx = self.index_groups()
            return ex.deriv(idx, self.operand())
        if name == "int":
            if not self.at("{"):
                self.fail("\\int needs a braced integrand")
            body = self.group()
            return ex.integral(body, self.measure())
        if name == "delta":
            nxt = self.peek()
            if self.at("{") or self.at("(") or nxt.kind in ("ident", "cmd"):
                return ex.accent("delta", self.operand())
            return ex.sym("delta", self.index_groups())
        if name in ex.SCALAR_FUNCTIONS:
            return ex.fn(name, self.operand())
        if name == "frac":
            a = self.group()
            b = self.group()
            return ex.mul(a, ex.power(b, -1))
        if name == "components":
            idx = self.index_groups()
            items = self.brace_content(force_list=True).args
            if not items or any(i.kind != ex.EQ or i.lhs.kind != ex.SYM for i in items):
                self.fail("\\components needs a list of component assignments", t)
            return ex.table(items[0].lhs.name, idx, items)
        if name in GREEK:
            return ex.sym(name, self.index_groups())
        raise ParseError(f"unknown command \\{name}", t.line, t.col)

    def measure(self):
        if self.at("{"):
            return self.group()
        t = self.peek()
        if t.kind == "ident" and t.text.startswith("d"):
            self.next()
            if len(t.text) > 1:
                return ex.sym(t.text[1:])
            c = self.next()
            if c.kind == "cmd" and c.text in GREEK:
                return ex.sym(c.text)
            self.fail("expected an integration variable", c)
        self.fail("\\int needs a measure ({x} or dx)")


def _make_equation(lhs, rhs):
    if lhs.kind == ex.SYM and lhs.indices and rhs.kind == ex.LIST and rhs.args and all(
            a.kind == ex.EQ and a.lhs.kind == ex.SYM and a.lhs.name == lhs.name
            and len(a.lhs.indices) == len(lhs.indices) for a in rhs.args):
        return ex.equation(lhs, ex.table(lhs.name, lhs.indices, rhs.args))
    return ex.equation(lhs, rhs)


def parse_expression(text: str, line: int = 1) -> ex.Expr:
    return _Parser(text, line).parse()


# ---------------------------------------------------------------------------
# statements

OP_ALIASES = {"map_sympy": "map_scalar"}


@dataclass
class Arg:
    kind: str          # expr | ref | str | kw
    value: object
    key: str = None


@dataclass
class Statement:
    kind: str          # attach | assign | call | show
    terminator: str
    text: str = ""
    line: int = 1
    label: str = None
    expr: ex.Expr = None
    objects: list = field(default_factory=list)
    prop: Property = None
    op: str = None
    args: list = field(default_factory=list)

    @property
    def display(self) -> bool:
        return self.terminator == ";"


def _split_top(text: str, sep: str = ",") -> list:
    parts, depth, buf, in_dollar, in_str = [], 0, [], False, False
    for ch in text:
        if ch == '"' and not in_dollar:
            in_str = not in_str
        elif ch == "$" and not in_str:
            in_dollar = not in_dollar
        elif not in_dollar and not in_str:
            if ch in "{([":
                depth += 1
            elif ch in "})]":
                depth -= 1
            elif ch == sep and depth == 0:
                parts.append("".join(buf))
                buf = []
                continue
        buf.append(ch)
    parts.append("".join(buf))
    return [p.strip() for p in parts if p.strip()]


def _find_top(text: str, needle: str) -> int:
    depth, in_dollar = 0, False
    for i, ch in enumerate(text):
        if ch == "$":
            in_dollar = not in_dollar
        elif not in_dollar:
            if ch in "{([":
                depth += 1
            elif ch in "})]":
                depth -= 1
            elif depth == 0 and text.startswith(needle, i):
                return i
    return -1


def _matching_paren(text: str, open_at: int) -> int:
    depth = 0
    for i in range(open_at, len(text)):
        if text[i] == "(":
            depth += 1
        elif text[i] == ")":
            depth -= 1
            if depth == 0:
                return i
    return -1


def _parse_value(text: str, line: int):
    if text in ("True", "False"):
        return text == "True"
    if re.fullmatch(r"[A-Za-z]+", text):
        return text
    v = parse_expression(text, line)
    return list(v.args) if v.kind == ex.LIST else v


def _parse_arg(text: str, line: int) -> Arg:
    if text.startswith("$"):
        if not text.endswith("$") or len(text) < 2:
            raise ParseError("unterminated $...$ expression", line, 1)
        return Arg("expr", parse_expression(text[1:-1], line))
    if text.startswith('"'):
        return Arg("str", text.strip('"'))
    m = re.fullmatch(r"([A-Za-z_]\w*)\s*=(?!=)\s*(.+)", text, re.S)
    if m:
        return Arg("kw", _parse_value(m.group(2).strip(), line), key=m.group(1))
    if re.fullmatch(r"[A-Za-z_]\w*", text):
        return Arg("ref", text)
    return Arg("expr", parse_expression(text, line))


def parse_statement(text: str, line: int = 1) -> Statement:
    s = text.strip()
    if not s or s[-1] not in ";.":
        raise ParseError("missing statement terminator ';' or '.'", line, len(s) + 1)
    term, body = s[-1], s[:-1].strip()
    if not body:
        raise ParseError("empty statement", line, 1)

    cut = _find_top(body, "::")
    if cut >= 0:
        return _parse_attach(body[:cut], body[cut + 2:].strip(), term, s, line)

    m = re.match(r"([A-Za-z_]\w*)\s*:=(.*)\Z", body, re.S)
    if m:
        return Statement("assign", term, s, line, label=m.group(1),
                         expr=parse_expression(m.group(2), line))

    m = re.match(r"([A-Za-z_]\w*(?:\.[A-Za-z_]\w*)*)\s*\(", body)
    if m and m.group(1) not in ex.SCALAR_FUNCTIONS and \
            _matching_paren(body, m.end() - 1) == len(body) - 1:
        return _parse_call(m.group(1), body[m.end():-1], term, s, line)

    if re.fullmatch(r"[A-Za-z_]\w*", body) and body not in ex.SCALAR_FUNCTIONS:
        expr = None if body == "_" else ex.sym(body)
        return Statement("show", term, s, line, label=body, expr=expr)
    return Statement("show", term, s, line, expr=parse_expression(body, line))


def _parse_attach(left, right, term, text, line):
    objs = parse_expression(left, line)
    objects = list(objs.args) if objs.kind == ex.LIST else [objs]
    m = re.fullmatch(r"([A-Za-z]\w*)\s*(?:\((.*)\))?", right, re.S)
    if not m:
        raise ParseError(f"malformed property {right!r}", line, 1)
    options, args = {}, []
    for part in _split_top(m.group(2) or ""):
        km = re.fullmatch(r"([A-Za-z_]\w*)\s*=(?!=)\s*(.+)", part, re.S)
        if km:
            options[km.group(1)] = _parse_value(km.group(2).strip(), line)
        else:
            args.append(parse_expression(part, line))
    from .errors import PropertyError
    try:
        prop = Property(m.group(1), options, tuple(args))
    except PropertyError as err:
        raise ParseError(str(err), line, 1) from None
    return Statement("attach", term, text, line, objects=objects, prop=prop)


def _parse_call(name, inner, term, text, line):
    args = [_parse_arg(a, line) for a in _split_top(inner)]
    if name.endswith("._sympy_"):
        return Statement("call", term, text, line, op="to_scalar",
                         args=[Arg("ref", name[:-len("._sympy_")])])
    if name.startswith("sympy."):
        return Statement("call", term, text, line, op="scalar_call",
                         args=[Arg("str", name[len("sympy."):])] + args)
    return Statement("call", term, text, line, op=OP_ALIASES.get(name, name), args=args)


def split_script(text: str) -> list:
    """Split script text into ``(statement text, line number)`` pairs."""
    out = []
    lines = text.splitlines()
    buf, start = [], None
    depth, in_dollar, in_str = 0, False, False
    k = 0
    while k < len(lines):
        raw = lines[k]
        k += 1
        stripped = raw.strip()
        if not buf and (not stripped or stripped.startswith("#")):
            continue
        if not buf and stripped.startswith("def post_process"):
            ops = []
            while k < len(lines) and (not lines[k].strip() or lines[k][:1].isspace()):
                body = lines[k].strip()
                k += 1
                fm = re.fullmatch(r"(\w+)\s*\(\s*\w+\s*\)", body)
                if fm:
                    ops.append(fm.group(1))
            out.append((f"set_post_process({', '.join(ops)}).", k))
            continue
        if start is None:
            start = k
        for j, ch in enumerate(raw):
            buf.append(ch)
            if ch == '"' and not in_dollar:
                in_str = not in_str
            elif ch == "$" and not in_str:
                in_dollar = not in_dollar
            elif in_dollar or in_str:
                continue
            elif ch in "{([":
                depth += 1
            elif ch in "})]":
                depth -= 1
            elif depth == 0 and (ch == ";" or (ch == "." and raw[j + 1:j + 2] in ("", " ", "\t"))):
                stmt = "".join(buf).strip()
                if stmt:
                    out.append((stmt, start))
                buf, start = [], k
        buf.append("\n")
        if not "".join(buf).strip():
            buf, start = [], None
    rest = "".join(buf).strip()
    if rest:
        raise ParseError("missing statement terminator ';' or '.'", start or 1, 1)
    return out
