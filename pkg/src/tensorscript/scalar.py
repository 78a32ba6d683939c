"""Scalar simplification kernel: canonical forms, differentiation, basic
integration and trigonometric normalisation for index-free expressions.

Canonical form is a sum of monomials ``c * b1**e1 * b2**e2 ...`` with exact
rational ``c`` and ``e``; the bases are symbols, function applications and
(when raised to a non-natural power) whole sums.  Besides multiplying out and
merging exponents, a sum raised to a negative power cancels against a
numerator that it divides exactly; there is no general rational-function gcd.
"""
from __future__ import annotations

import math
from fractions import Fraction

from . import expr as ex
from .errors import (EngineError, NotScalarError, UndefinedValueError,
                     UnknownFunctionError, UnsupportedIntegralError)

_NON_SCALAR = (ex.DERIV, ex.ACCENT, ex.TABLE, ex.EQ, ex.RULE, ex.LIST, ex.WILD)


def is_scalar(e: ex.Expr) -> bool:
    return not any(n.indices or n.kind in _NON_SCALAR for n in ex.walk(e))


# ---------------------------------------------------------------------------
# polynomial view

def _base_key(base):
    return ex.sort_key(base)


def _mono(pairs):
    """Normalise ``[(base, exp), ...]`` into (sorted monomial, coefficient factor)."""
    acc = {}
    for b, n in pairs:
        acc[b] = acc.get(b, Fraction(0)) + n
    coeff = Fraction(1)
    out = []
    for b, n in acc.items():
        if n == 0:
            continue
        if b.kind == ex.NUM:
            r = ex._rational_power(b.value, n)
            if r is not None:
                coeff *= r
                continue
        out.append((b, n))
    out.sort(key=lambda p: (_base_key(p[0]), p[1]))
    return tuple(out), coeff


def _padd(p, q):
    r = dict(p)
    for m, c in q.items():
        v = r.get(m, 0) + c
        if v:
            r[m] = v
        else:
            r.pop(m, None)
    return r


def _pmul(p, q):
    r = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m, k = _mono(m1 + m2)
            v = r.get(m, 0) + c1 * c2 * k
            if v:
                r[m] = v
            else:
                r.pop(m, None)
    return r


def _atom(base, n=Fraction(1)):
    m, k = _mono([(base, Fraction(n))])
    return {m: k}


def to_poly(e: ex.Expr) -> dict:
    k = e.kind
    if k == ex.NUM:
        return {(): e.value} if e.value else {}
    if k == ex.SUM:
        p = {}
        for t in e.args:
            p = _padd(p, to_poly(t))
        return p
    if k == ex.PROD:
        p = {(): Fraction(1)}
        for f in e.args:
            p = _pmul(p, to_poly(f))
        return p
    if k == ex.POW:
        return _pow_poly(e.args[0], e.args[1])
    if k == ex.FN:
        return _fn_poly(e.name, simplify(e.args[0]))
    if k == ex.INT:
        return _atom(ex.integral(simplify(e.args[0]), e.args[1]))
    return _atom(e)


def _pow_poly(b, x):
    x = simplify(x)
    if x.kind != ex.NUM:
        return _atom(ex.Expr(ex.POW, args=(simplify(b), x)))
    n = x.value
    pb = to_poly(b)
    if n.denominator == 1 and n >= 0:
        r = {(): Fraction(1)}
        for _ in range(int(n)):
            r = _pmul(r, pb)
        return r
    if not pb:
        raise UndefinedValueError("division by zero")
    if len(pb) == 1:
        (mono, c), = pb.items()
        pairs = [(bb, e * n) for bb, e in mono]
        r = ex._rational_power(c, n)
        if r is None:
            pairs.append((ex.num(c), n))
            r = Fraction(1)
        m, kf = _mono(pairs)
        return {m: r * kf}
    return _atom(from_poly(pb), n)


def _fn_poly(name, arg):
    if arg.kind == ex.NUM:
        if name == "sin" and arg.value == 0:
            return {}
        if name == "cos" and arg.value == 0:
            return {(): Fraction(1)}
        if name == "log" and arg.value == 1:
            return {}
        if name == "log" and arg.value <= 0:
            raise UndefinedValueError("log of a non-positive number")
    return to_poly(ex.fn(name, arg)) if name == "tan" else _atom(ex.fn(name, arg))


def _mono_key(item):
    mono, _ = item
    return tuple((_base_key(b), n) for b, n in mono)


def _divide(r: dict, q: dict):
    """Exact quotient r / q of Laurent polynomials, or None."""
    bases = sorted({b for m in list(r) + list(q) for b, _ in m}, key=_base_key)
    if any(b.kind == ex.NUM for b in bases):
        return None  # irrational constants make the division ambiguous
    pos = {b: i for i, b in enumerate(bases)}

    def vec(m):
        v = [Fraction(0)] * len(bases)
        for b, n in m:
            v[pos[b]] = n
        return tuple(v)

    lead_q = max(q, key=vec)
    inv_lead = [(b, -n) for b, n in lead_q]
    # every quotient term lies above trail(r) / trail(q) in the term order
    floor = tuple(a - b for a, b in zip(vec(min(r, key=vec)), vec(min(q, key=vec))))
    out = {}
    for _ in range(4 * len(r) + 8):
        if not r:
            return out
        lead = max(r, key=vec)
        m, _ = _mono(list(lead) + inv_lead)
        if vec(m) < floor:
            return None
        t = {m: r[lead] / q[lead_q]}
        out = _padd(out, t)
        r = _padd(r, {mm: -c for mm, c in _pmul(t, q).items()})
    return None


def _cancel(p: dict) -> dict:
    """Divide sums raised to negative powers into the monomials they multiply."""
    done = set()
    while True:
        todo = [(b, n) for m in p for b, n in m
                if b.kind == ex.SUM and n < 0 and (b, n) not in done]
        if not todo:
            return p
        base, n = todo[0]
        done.add((base, n))
        num, rest = {}, {}
        for mono, c in p.items():
            if (base, n) in mono:
                num[tuple(x for x in mono if x != (base, n))] = c
            else:
                rest[mono] = c
        quo = _divide(num, to_poly(base))
        if quo is not None:
            p = _padd(rest, _pmul(quo, _atom(base, n + 1)))
            done.clear()


def from_poly(p: dict) -> ex.Expr:
    terms = []
    for mono, c in sorted(p.items(), key=_mono_key):
        terms.append(ex.mul(ex.num(c), *(ex.power(b, n) for b, n in mono)))
    return ex.add(*terms)


# ---------------------------------------------------------------------------
# kernel operations

def simplify(e: ex.Expr) -> ex.Expr:
    """Canonical form; idempotent."""
    if e.kind in (ex.EQ, ex.RULE, ex.LIST):
        return ex.rebuild(e, [simplify(a) for a in e.args])
    return from_poly(_cancel(to_poly(e)))


def depends_on(e: ex.Expr, c: str) -> bool:
    return any(n.kind == ex.SYM and n.name == c and not n.indices for n in ex.walk(e))


def _d(e: ex.Expr, c: str) -> ex.Expr:
    k = e.kind
    if not depends_on(e, c):
        if k in _NON_SCALAR or (k == ex.SYM and e.indices):
            raise NotScalarError("diff needs an index-free expression")
        return ex.ZERO
    if k == ex.SYM:
        return ex.ONE
    if k == ex.SUM:
        return ex.add(*(_d(t, c) for t in e.args))
    if k == ex.PROD:
        out = []
        for i, f in enumerate(e.args):
            out.append(ex.mul(*e.args[:i], _d(f, c), *e.args[i + 1:]))
        return ex.add(*out)
    if k == ex.POW:
        b, x = e.args
        if not depends_on(x, c):
            return ex.mul(x, ex.power(b, ex.add(x, ex.num(-1))), _d(b, c))
        return ex.mul(e, ex.add(ex.mul(_d(x, c), ex.fn("log", b)),
                                ex.mul(x, _d(b, c), ex.power(b, -1))))
    if k == ex.FN:
        a = e.args[0]
        inner = _d(a, c)
        if e.name == "sin":
            return ex.mul(ex.fn("cos", a), inner)
        if e.name == "cos":
            return ex.mul(ex.num(-1), ex.fn("sin", a), inner)
        if e.name == "log":
            return ex.mul(ex.power(a, -1), inner)
    if k == ex.INT:
        body, var = e.args
        if var.name == c:
            return body
        return ex.integral(_d(body, c), var)
    raise NotScalarError(f"cannot differentiate a {k} node")


def diff(e: ex.Expr, c: str) -> ex.Expr:
    """Partial derivative with respect to the symbol ``c``."""
    if isinstance(c, ex.Expr):
        c = c.name
    return simplify(_d(e, c))


def integrate_basic(e: ex.Expr, c: str) -> ex.Expr:
    """Antiderivative of a combination of powers of ``c`` (no constant added)."""
    if isinstance(c, ex.Expr):
        c = c.name
    var = ex.sym(c)
    out = []
    for mono, coeff in to_poly(simplify(e)).items():
        n = Fraction(0)
        rest = []
        for b, k in mono:
            if b == var:
                n = k
            elif depends_on(b, c):
                raise UnsupportedIntegralError(f"cannot integrate {ex.power(b, k)!r} in {c}")
            else:
                rest.append(ex.power(b, k))
        if n == -1:
            out.append(ex.mul(ex.num(coeff), *rest, ex.fn("log", var)))
        else:
            out.append(ex.mul(ex.num(coeff / (n + 1)), *rest, ex.power(var, n + 1)))
    return simplify(ex.add(*out))


def _reduce_cos_squares(p: dict):
    """Rewrite cos(u)**k (k >= 2) as cos(u)**(k mod 2) (1 - sin(u)**2)**(k div 2)."""
    for mono, c in p.items():
        for i, (b, n) in enumerate(mono):
            if b.kind == ex.FN and b.name == "cos" and n.denominator == 1 and n >= 2:
                s = ex.fn("sin", b.args[0])
                repl = ex.mul(ex.power(b, n % 2),
                              ex.power(ex.add(ex.ONE, ex.neg(ex.power(s, 2))), n // 2))
                others = [ex.power(bb, nn) for j, (bb, nn) in enumerate(mono) if j != i]
                rest = dict(p)
                del rest[mono]
                return _padd(rest, to_poly(ex.mul(ex.num(c), repl, *others)))
    return None


def trig_normalize(e: ex.Expr) -> ex.Expr:
    """Apply sin^2 + cos^2 = 1 (eliminating even powers of cos), then simplify."""
    if e.kind in (ex.EQ, ex.RULE, ex.LIST):
        return ex.rebuild(e, [trig_normalize(a) for a in e.args])
    p = to_poly(e)
    while True:
        q = _reduce_cos_squares(p)
        if q is None:
            return from_poly(p)
        p = q


def free_symbols(e: ex.Expr) -> list:
    out = []
    for n in ex.walk(e):
        if n.kind == ex.SYM and not n.indices and n.name not in out:
            out.append(n.name)
    return out


def _integration_variable(s: ex.Expr, coordinates=()):
    names = free_symbols(s)
    coords = [c for c in coordinates if c in names]
    if len(coords) == 1:
        return coords[0]
    if len(names) == 1:
        return names[0]
    raise UnsupportedIntegralError("cannot choose an integration variable")


def integrate(s: ex.Expr, coordinates=()) -> ex.Expr:
    if s.kind == ex.INT:
        return integrate_basic(s.args[0], s.args[1].name)
    return integrate_basic(s, _integration_variable(s, coordinates))


def evaluate_integrals(e: ex.Expr) -> ex.Expr:
    """Replace integral nodes by antiderivatives where supported."""
    def go(i):
        body = evaluate_integrals(i.args[0])
        try:
            return integrate_basic(body, i.args[1].name)
        except (UnsupportedIntegralError, NotScalarError):
            return ex.integral(body, i.args[1])
    return ex.map_integrals(e, go)


def kernel_eval(e: ex.Expr) -> ex.Expr:
    """Default scalar processing: integrate integral nodes, then simplify."""
    return simplify(evaluate_integrals(e))


SCALAR_FUNCTIONS = {
    "integrate": integrate,
    "simplify": lambda s, coordinates=(): simplify(s),
    "expand_trig": lambda s, coordinates=(): trig_normalize(s),
    "trig_normalize": lambda s, coordinates=(): trig_normalize(s),
}


def scalar_call(fn_name: str, s: ex.Expr, coordinates=()) -> ex.Expr:
    """Dispatch a named kernel function without touching anything else."""
    try:
        f = SCALAR_FUNCTIONS[fn_name]
    except KeyError:
        raise UnknownFunctionError(f"unknown scalar function {fn_name!r}") from None
    return f(s, coordinates=coordinates)


def map_scalar(e: ex.Expr, f) -> ex.Expr:
    """Apply ``f`` to every maximal index-free subexpression of ``e``."""
    if is_scalar(e):
        return f(e)
    if e.kind == ex.TABLE:
        return ex.table(e.name, e.indices,
                        [ex.equation(en.lhs, f(en.rhs)) for en in e.args])
    if not e.args:
        return e
    return ex.rebuild(e, [map_scalar(a, f) for a in e.args])


def numeric(e: ex.Expr, env: dict) -> float:
    """Floating-point value of a scalar expression."""
    k = e.kind
    if k == ex.NUM:
        return float(e.value)
    if k == ex.SYM:
        try:
            return env[e.name]
        except KeyError:
            raise EngineError(f"no numeric value for {e.name}") from None
    if k == ex.SUM:
        return math.fsum(numeric(t, env) for t in e.args)
    if k == ex.PROD:
        return math.prod(numeric(f, env) for f in e.args)
    if k == ex.POW:
        return numeric(e.args[0], env) ** numeric(e.args[1], env)
    if k == ex.FN:
        return getattr(math, e.name)(numeric(e.args[0], env))
    raise NotScalarError(f"cannot evaluate a {k} node numerically")
