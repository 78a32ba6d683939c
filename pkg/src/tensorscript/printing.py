"""TeX and plain-text printers.  Both outputs parse back to the same tree."""
from __future__ import annotations

from fractions import Fraction

from . import expr as ex

GREEK = frozenset("""alpha beta gamma delta epsilon varepsilon zeta eta theta vartheta
iota kappa lambda mu nu xi pi varpi rho varrho sigma varsigma tau upsilon phi varphi
chi psi omega Gamma Delta Theta Lambda Xi Pi Sigma Upsilon Phi Psi Omega""".split())


def print_latex(e: ex.Expr) -> str:
    return _Printer(latex=True).p(e)


def print_plain(e: ex.Expr) -> str:
    return _Printer(latex=False).p(e)


def printer_for(mode: str):
    return print_latex if mode == "latex" else print_plain


class _Printer:
    def __init__(self, latex: bool):
        self.latex = latex

    def name(self, n: str) -> str:
        return "\\" + n if self.latex and n in GREEK else n

    def cmd(self, n: str) -> str:
        return "\\" + n

    def groups(self, indices) -> str:
        out = []
        i = 0
        while i < len(indices):
            up = indices[i].up
            j = i
            while j < len(indices) and indices[j].up == up:
                j += 1
            out.append(("^" if up else "_") + "{" + self._names(indices[i:j]) + "}")
            i = j
        return "".join(out)

    def _names(self, idx) -> str:
        if not self.latex:
            return " ".join(i.name for i in idx)
        s = ""
        for i in idx:
            n = self.name(i.name)
            if s and not n.startswith("\\"):
                s += " "
            s += n
        return s

    # -- numbers -----------------------------------------------------------

    def number(self, v: Fraction) -> str:
        if v.denominator == 1:
            return str(v.numerator)
        sign = "-" if v < 0 else ""
        if self.latex:
            return f"{sign}\\frac{{{abs(v.numerator)}}}{{{v.denominator}}}"
        return f"{sign}{abs(v.numerator)}/{v.denominator}"

    # -- dispatch ----------------------------------------------------------

    def p(self, e: ex.Expr) -> str:
        return getattr(self, "p_" + e.kind)(e)

    def p_num(self, e):
        return self.number(e.value)

    def p_wild(self, e):
        return "#"

    def p_sym(self, e):
        return self.name(e.name) + self.groups(e.indices)

    def p_sum(self, e):
        parts = []
        for k, t in enumerate(e.args):
            c, rest = ex.split_coeff(t)
            if k == 0:
                parts.append(self.p(t))
            elif c < 0:
                parts.append(" - " + self.p(ex.mul(ex.num(-c), rest)))
            else:
                parts.append(" + " + self.p(t))
        return "".join(parts)

    def factor(self, f) -> str:
        if f.kind in (ex.SUM, ex.EQ, ex.RULE):
            return "(" + self.p(f) + ")"
        return self.p(f)

    def p_prod(self, e):
        c, rest = ex.split_coeff(e)
        factors = list(ex.factors_of(rest))
        body = self._factors(factors)
        if c == 1:
            return body
        if c == -1:
            return "-" + body
        head = self.number(c)
        if self.latex and not body[:1].isdigit():
            return head + body
        return head + " " + body

    def _factors(self, factors) -> str:
        if len(factors) >= 2 and all(_neg_power(f) for f in factors) \
                and not _tan_pair(factors[0], factors[1]):
            inv = ex.mul(*(ex.power(f, -1) for f in factors))
            return "(" + self.p(inv) + ")" + self.exponent(ex.num(-1))
        out = []
        i = 0
        while i < len(factors):
            f = factors[i]
            if i + 1 < len(factors):
                t = _tan_pair(f, factors[i + 1])
                if t is not None:
                    arg, k = t
                    s = self.p_fn(ex.Expr(ex.FN, name="tan", args=(arg,)))
                    out.append(s if k == 1 else s + self.exponent(ex.num(k)))
                    i += 2
                    continue
            out.append(self.factor(f))
            i += 1
        return " ".join(out)

    def exponent(self, x) -> str:
        if self.latex:
            if x.kind == ex.NUM:
                return "^{" + self.number(x.value) + "}"
            return "^{(" + self.p(x) + ")}"
        if x.kind == ex.NUM and x.value.denominator == 1 and x.value >= 0:
            return "**" + str(x.value)
        if x.kind == ex.SYM and not x.indices:
            return "**" + self.p(x)
        return "**(" + self.p(x) + ")"

    def p_pow(self, e):
        b, x = e.args
        bare = (b.kind == ex.SYM and not b.indices) or b.kind == ex.FN \
            or (b.kind == ex.NUM and b.value >= 0 and b.value.denominator == 1)
        base = self.p(b) if bare else "(" + self.p(b) + ")"
        return base + self.exponent(x)

    def p_fn(self, e):
        head = "\\" + e.name if self.latex else e.name
        return head + "(" + self.p(e.args[0]) + ")"

    def p_deriv(self, e):
        return self.cmd(e.name) + self.groups(e.indices) + "{" + self.p(e.args[0]) + "}"

    def p_accent(self, e):
        return self.cmd(e.name) + "{" + self.p(e.args[0]) + "}"

    def p_int(self, e):
        body, var = e.args
        if self.latex:
            return "\\int{" + self.p(body) + "} d" + self.p(var)
        return "\\int{" + self.p(body) + "}{" + self.p(var) + "}"

    def p_eq(self, e):
        l, r = e.args
        if r.kind == ex.TABLE and l.kind == ex.SYM and l.name == r.name and l.indices == r.indices:
            return self.p(l) + " = " + self._entries(r)
        return self.p(l) + " = " + self.p(r)

    def p_rule(self, e):
        return self.p(e.args[0]) + " -> " + self.p(e.args[1])

    def p_list(self, e):
        items = [self.p(a) for a in e.args]
        if len(items) == 1:
            return "{" + items[0] + ",}"
        return "{" + ", ".join(items) + "}"

    def _entries(self, t):
        return self.p_list(ex.lst(t.args))

    def p_table(self, e):
        return "\\components" + self.groups(e.indices) + self._entries(e)


def _neg_power(f) -> bool:
    return f.kind == ex.POW and f.args[1].kind == ex.NUM and f.args[1].value < 0


def _fn_power(f, name):
    if f.kind == ex.FN and f.name == name:
        return f.args[0], Fraction(1)
    if f.kind == ex.POW and f.args[0].kind == ex.FN and f.args[0].name == name \
            and f.args[1].kind == ex.NUM:
        return f.args[0].args[0], f.args[1].value
    return None


def _tan_pair(a, b):
    """(arg, k) when ``a b`` is cos(arg)**(-k) sin(arg)**k."""
    c = _fn_power(a, "cos")
    s = _fn_power(b, "sin")
    if c and s and c[0] == s[0] and c[1] == -s[1]:
        return c[0], s[1]
    return None
