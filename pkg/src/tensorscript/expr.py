"""Immutable expression trees, index bookkeeping and pattern replacement.

Every node is an :class:`Expr`.  Nodes are built through the smart
constructors in this module (``add``, ``mul``, ``power``, ...), which keep
sums and products flat and fold rational factors of a product into a single
leading coefficient.  Nothing here knows about properties directly; functions
that need to know whether an index is a coordinate value, or whether its
position is fixed, accept a registry-like object (see ``NULL_REGISTRY``).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .errors import (InconsistentSumError, MalformedTermError,
                     OutOfIndicesError, RuleShapeError, UndefinedValueError)

NUM = "num"
SYM = "sym"
SUM = "sum"
PROD = "prod"
POW = "pow"
FN = "fn"
DERIV = "deriv"
ACCENT = "accent"
INT = "int"
EQ = "eq"
RULE = "rule"
LIST = "list"
TABLE = "table"
WILD = "wild"

# Order of node kinds inside sorted products.
_KIND_ORDER = {NUM: 0, SYM: 1, FN: 2, POW: 3, ACCENT: 4, DERIV: 5, TABLE: 6,
               INT: 7, SUM: 8, PROD: 9, WILD: 10, LIST: 11, RULE: 12, EQ: 13}

SCALAR_FUNCTIONS = ("sin", "cos", "tan", "log")


@dataclass(frozen=True, slots=True)
class Index:
    name: str
    up: bool = False

    def flipped(self) -> "Index":
        return Index(self.name, not self.up)

    def __repr__(self):
        return ("^" if self.up else "_") + self.name


@dataclass(frozen=True, slots=True)
class Expr:
    kind: str
    name: str = ""
    indices: tuple = ()
    args: tuple = ()
    value: Fraction = Fraction(0)

    def __repr__(self):
        from .printing import print_plain
        return f"Expr({print_plain(self)!r})"

    # convenient accessors
    @property
    def lhs(self) -> "Expr":
        return self.args[0]

    @property
    def rhs(self) -> "Expr":
        return self.args[1]


class _NullRegistry:
    """Registry stand-in used when no properties have been declared."""

    _POOL = ["mu", "nu", "rho", "sigma", "tau", "lambda", "kappa",
             "alpha", "beta", "gamma", "epsilon", "zeta"]

    def is_coordinate(self, name):
        return False

    def is_fixed(self, name):
        return False

    def index_pool(self, name):
        return list(self._POOL)

    def index_rank(self, name):
        try:
            return (self._POOL.index(name), name)
        except ValueError:
            return (len(self._POOL), name)


NULL_REGISTRY = _NullRegistry()


# ---------------------------------------------------------------------------
# constructors

def num(value) -> Expr:
    return Expr(NUM, value=Fraction(value))


ZERO = num(0)
ONE = num(1)


def is_zero(e: Expr) -> bool:
    return e.kind == NUM and e.value == 0


def is_one(e: Expr) -> bool:
    return e.kind == NUM and e.value == 1


def sym(name: str, indices=()) -> Expr:
    return Expr(SYM, name=name, indices=tuple(indices))


def wild() -> Expr:
    return Expr(WILD, name="#")


def add(*terms: Expr) -> Expr:
    flat = []
    for t in terms:
        if t.kind == SUM:
            flat.extend(t.args)
        elif not is_zero(t):
            flat.append(t)
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return Expr(SUM, args=tuple(flat))


def mul(*factors: Expr) -> Expr:
    coeff = Fraction(1)
    flat = []
    stack = list(factors)
    for f in stack:
        if f.kind == PROD:
            for g in f.args:
                if g.kind == NUM:
                    coeff *= g.value
                else:
                    flat.append(g)
        elif f.kind == NUM:
            coeff *= f.value
        else:
            flat.append(f)
    if coeff == 0:
        return ZERO
    if not flat:
        return num(coeff)
    if coeff != 1:
        flat.insert(0, num(coeff))
    if len(flat) == 1:
        return flat[0]
    return Expr(PROD, args=tuple(flat))


def neg(e: Expr) -> Expr:
    return mul(num(-1), e)


def sub(a: Expr, b: Expr) -> Expr:
    return add(a, neg(b))


def _rational_power(base: Fraction, exp: Fraction):
    """Exact base**exp when it is rational, else None."""
    if exp.denominator == 1:
        if base == 0 and exp < 0:
            raise UndefinedValueError("division by zero")
        return base ** int(exp)
    if base < 0:
        return None
    q = exp.denominator
    num_root = round(base.numerator ** (1 / q))
    den_root = round(base.denominator ** (1 / q))
    for n in (num_root - 1, num_root, num_root + 1):
        for d in (den_root - 1, den_root, den_root + 1):
            if n >= 0 and d > 0 and n ** q == base.numerator and d ** q == base.denominator:
                return Fraction(n, d) ** exp.numerator
    return None


def power(base: Expr, exp) -> Expr:
    if not isinstance(exp, Expr):
        exp = num(exp)
    if exp.kind == NUM:
        n = exp.value
        if n == 1:
            return base
        if n == 0:
            if is_zero(base):
                raise UndefinedValueError("0**0 is undefined")
            return ONE
        if base.kind == NUM:
            r = _rational_power(base.value, n)
            if r is not None:
                return num(r)
        elif base.kind == POW and base.args[1].kind == NUM and n.denominator == 1:
            return power(base.args[0], num(base.args[1].value * n))
        elif base.kind == PROD and n.denominator == 1:
            return mul(*(power(f, exp) for f in base.args))
    return Expr(POW, args=(base, exp))


def fn(name: str, arg: Expr) -> Expr:
    if name == "tan":
        # stored as sin/cos; the printers restore the tan form
        return mul(power(Expr(FN, name="cos", args=(arg,)), -1),
                   Expr(FN, name="sin", args=(arg,)))
    return Expr(FN, name=name, args=(arg,))


def deriv(indices, operand: Expr, name: str = "partial") -> Expr:
    return Expr(DERIV, name=name, indices=tuple(indices), args=(operand,))


def accent(name: str, operand: Expr) -> Expr:
    return Expr(ACCENT, name=name, args=(operand,))


def integral(integrand: Expr, var: Expr) -> Expr:
    return Expr(INT, args=(integrand, var))


def equation(lhs: Expr, rhs: Expr) -> Expr:
    return Expr(EQ, args=(lhs, rhs))


def rule(lhs: Expr, rhs: Expr) -> Expr:
    return Expr(RULE, args=(lhs, rhs))


def lst(items) -> Expr:
    return Expr(LIST, args=tuple(items))


def table(name: str, slots, entries) -> Expr:
    """Component table; ``entries`` are equations ``T_{concrete} = value``."""
    entries = tuple(e for e in entries if not is_zero(e.rhs))
    if not entries:
        return ZERO
    return Expr(TABLE, name=name, indices=tuple(slots), args=entries)


def rebuild(e: Expr, args=None, indices=None) -> Expr:
    """Recreate ``e`` with new children/indices through the smart constructors."""
    args = e.args if args is None else tuple(args)
    indices = e.indices if indices is None else tuple(indices)
    k = e.kind
    if k == SUM:
        return add(*args)
    if k == PROD:
        return mul(*args)
    if k == POW:
        return power(args[0], args[1])
    if k == FN:
        return fn(e.name, args[0])
    if k == TABLE:
        return table(e.name, indices, args)
    if k in (NUM, WILD):
        return e
    return Expr(k, name=e.name, indices=indices, args=args, value=e.value)


def split_coeff(e: Expr):
    """Split a term into (rational coefficient, remaining factor)."""
    if e.kind == NUM:
        return e.value, ONE
    if e.kind == PROD and e.args[0].kind == NUM:
        return e.args[0].value, mul(*e.args[1:])
    return Fraction(1), e


def terms_of(e: Expr):
    return e.args if e.kind == SUM else (() if is_zero(e) else (e,))


def factors_of(e: Expr):
    return e.args if e.kind == PROD else (e,)


def walk(e: Expr) -> Iterator[Expr]:
    yield e
    for a in e.args:
        yield from walk(a)


def structural_equal(a: Expr, b: Expr) -> bool:
    return a == b


def sort_key(e: Expr, rank=None):
    """Total order on expressions, used to sort commuting factors."""
    rank = rank or NULL_REGISTRY.index_rank
    return (_KIND_ORDER[e.kind], e.name,
            tuple((rank(i.name), 0 if i.up else 1) for i in e.indices),
            e.value, tuple(sort_key(a, rank) for a in e.args))


def has_indices(e: Expr) -> bool:
    return any(n.indices or n.kind in (TABLE, WILD) for n in walk(e))


# ---------------------------------------------------------------------------
# index bookkeeping

def _occurrences(e: Expr, reg, out: list):
    """Index occurrences of a term; nested sums contribute their free indices."""
    k = e.kind
    if k in (SYM, TABLE, DERIV):
        out.extend(i for i in e.indices if not reg.is_coordinate(i.name))
        if k == DERIV:
            _occurrences(e.args[0], reg, out)
    elif k == SUM:
        out.extend(free_indices(e, reg))
    elif k in (INT, EQ, RULE, LIST):
        return
    else:
        for a in e.args:
            _occurrences(a, reg, out)


def walk_indices(e: Expr, reg=NULL_REGISTRY) -> Iterator[Index]:
    """All index occurrences in reading order, skipping integrals and table entries."""
    if e.kind in (SYM, TABLE, DERIV):
        for i in e.indices:
            if not reg.is_coordinate(i.name):
                yield i
        if e.kind != DERIV:
            return
    if e.kind == INT:
        return
    for a in e.args:
        yield from walk_indices(a, reg)


def all_index_names(e: Expr) -> set:
    return {i.name for n in walk(e) for i in n.indices}


def _term_structure(e: Expr, reg):
    occ = []
    _occurrences(e, reg, occ)
    seen = {}
    for i in occ:
        seen.setdefault(i.name, []).append(i)
    free, dummies = [], []
    for name, group in seen.items():
        if len(group) > 2:
            raise MalformedTermError(f"index {name} appears {len(group)} times in one term")
        if len(group) == 2:
            if group[0].up == group[1].up and not reg.is_fixed(name):
                raise MalformedTermError(f"dummy pair {name} must be one upper, one lower")
            dummies.append(name)
        else:
            free.append(group[0])
    return free, dummies


def free_indices(e: Expr, reg=NULL_REGISTRY) -> tuple:
    """Free indices (with variance) in first-appearance order."""
    if e.kind == SUM:
        sets = [free_indices(t, reg) for t in e.args]
        first = sets[0]
        for s in sets[1:]:
            if set(s) != set(first):
                raise InconsistentSumError(f"free indices {first} vs {s}")
        return first
    if e.kind in (EQ, RULE):
        return free_indices(e.args[0], reg)
    if e.kind == LIST:
        return ()
    if e.kind == INT:
        return free_indices(e.args[0], reg)
    return tuple(_term_structure(e, reg)[0])


def dummy_names(e: Expr, reg=NULL_REGISTRY) -> list:
    return _term_structure(e, reg)[1]


def relabel(e: Expr, mapping: dict) -> Expr:
    """Rename indices simultaneously; ``mapping`` maps name -> (new name, flip)."""
    if not mapping:
        return e
    k = e.kind
    if k in (INT, NUM, WILD):
        return e
    new_idx = e.indices
    if e.indices:
        new_idx = tuple(_relabel_index(i, mapping) for i in e.indices)
    if k == TABLE:
        return Expr(TABLE, name=e.name, indices=new_idx, args=e.args)
    if k == SYM:
        return Expr(SYM, name=e.name, indices=new_idx)
    return rebuild(e, [relabel(a, mapping) for a in e.args], new_idx)


def _relabel_index(i: Index, mapping):
    if i.name in mapping:
        name, flip = mapping[i.name]
        return Index(name, i.up != flip)
    return i


def map_integrals(e: Expr, f) -> Expr:
    """Apply ``f`` to every outermost integral node."""
    if e.kind == INT:
        return f(e)
    if not e.args or e.kind == TABLE:
        return e
    return rebuild(e, [map_integrals(a, f) for a in e.args])


def fresh_names(wanted, reg, taken: set) -> dict:
    """Pick pool names for each name in ``wanted`` avoiding ``taken``."""
    taken = set(taken)
    out = {}
    for name in wanted:
        for cand in reg.index_pool(name):
            if cand not in taken:
                out[name] = cand
                taken.add(cand)
                break
        else:
            raise OutOfIndicesError(f"no fresh index name available for {name}")
    return out


def rename_dummies(e: Expr, reg=NULL_REGISTRY) -> Expr:
    """Rename dummy pairs, per term, to the index pool in first-appearance order."""
    k = e.kind
    if k == SUM:
        return add(*(rename_dummies(t, reg) for t in e.args))
    if k in (EQ, RULE, LIST):
        return rebuild(e, [rename_dummies(a, reg) for a in e.args])
    if k == INT:
        return integral(rename_dummies(e.args[0], reg), e.args[1])
    e = map_integrals(e, lambda i: integral(rename_dummies(i.args[0], reg), i.args[1]))
    dummies = set(dummy_names(e, reg))
    if not dummies:
        return e
    order = []
    for i in walk_indices(e, reg):
        if i.name in dummies and i.name not in order:
            order.append(i.name)
    keep = all_index_names(e) - dummies
    names = fresh_names(order, reg, keep)
    return relabel(e, {d: (n, False) for d, n in names.items()})


# ---------------------------------------------------------------------------
# matching

def _match_indices(pidx, sidx, reg, b) -> bool:
    if len(pidx) != len(sidx):
        return False
    for p, s in zip(pidx, sidx):
        if reg.is_coordinate(p.name):
            if p != s:
                return False
            continue
        if p.name in b:
            name, flip = b[p.name]
            if s.name != name or s.up != (p.up != flip):
                return False
        else:
            flip = p.up != s.up
            if flip and (reg.is_fixed(p.name) or reg.is_fixed(s.name)):
                return False
            b[p.name] = (s.name, flip)
    return True


def match(pattern: Expr, subject: Expr, reg=NULL_REGISTRY, bindings=None):
    """Match ``pattern`` against ``subject``; index names in the pattern are variables.

    Returns the index bindings ``{pattern name: (subject name, flipped)}`` or None.
    """
    b = {} if bindings is None else dict(bindings)
    if pattern.kind == WILD:
        return b
    if pattern.kind != subject.kind or pattern.name != subject.name:
        return None
    if pattern.kind == NUM:
        return b if pattern.value == subject.value else None
    if not _match_indices(pattern.indices, subject.indices, reg, b):
        return None
    if len(pattern.args) != len(subject.args):
        return None
    if pattern.kind == PROD and len(pattern.args) <= 6:
        for perm in itertools.permutations(subject.args):
            r = _match_seq(pattern.args, perm, reg, b)
            if r is not None:
                return r
        return None
    return _match_seq(pattern.args, subject.args, reg, b)


def _match_seq(pats, subs, reg, b):
    for p, s in zip(pats, subs):
        b = match(p, s, reg, b)
        if b is None:
            return None
    return b


def contains_match(e: Expr, pattern: Expr, reg=NULL_REGISTRY) -> bool:
    return any(match(pattern, n, reg) is not None for n in walk(e))


def instantiate(template: Expr, bindings: dict, reg=NULL_REGISTRY, avoid=frozenset()) -> Expr:
    """Fill a rule template from match bindings, freshening its own dummies."""
    mapping = dict(bindings)
    unbound = []
    for i in walk_indices(template, reg):
        if i.name not in mapping and i.name not in unbound:
            unbound.append(i.name)
    if unbound:
        taken = set(avoid) | {n for n, _ in bindings.values()}
        for old, new in fresh_names(unbound, reg, taken).items():
            mapping[old] = (new, False)
    return relabel(template, mapping)


def check_rule_shape(lhs: Expr, rhs: Expr, reg=NULL_REGISTRY):
    if any(n.kind == WILD for n in walk(lhs)):
        return
    fl = {i.name for i in free_indices(lhs, reg)}
    fr = {i.name for i in free_indices(rhs, reg)}
    if not is_zero(rhs) and fl != fr:
        raise RuleShapeError(f"rule free indices differ: {sorted(fl)} vs {sorted(fr)}")


def match_replace(e: Expr, lhs: Expr, rhs: Expr, reg=NULL_REGISTRY) -> Expr:
    """Replace every non-overlapping occurrence of ``lhs``, innermost first."""
    check_rule_shape(lhs, rhs, reg)
    avoid = all_index_names(e)

    def go(node):
        if node.args and node.kind != TABLE:
            new_args = [go(a) for a in node.args]
            if any(n is not o for n, o in zip(new_args, node.args)):
                return rebuild(node, new_args)
        b = match(lhs, node, reg)
        if b is not None:
            return instantiate(rhs, b, reg, avoid)
        return node

    return go(e)
