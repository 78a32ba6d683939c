"""Abstract-index manipulation: distribution, sorting, collection,
canonicalisation, substitution, variation and integration by parts.

All operations are pure functions ``op(expr, ..., reg)`` and act on both sides
of an equation.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

from . import expr as ex
from .errors import CanonicalisationLimitError, EngineError

MAX_CANON_INDICES = 8
MAX_CANON_CANDIDATES = 200_000


def _rank(reg):
    return reg.index_rank


# ---------------------------------------------------------------------------
# distribute

def distribute(e: ex.Expr, reg=ex.NULL_REGISTRY) -> ex.Expr:
    """Expand products over sums and derivatives over sums, recursively."""
    if not e.args or e.kind in (ex.TABLE, ex.NUM):
        return e
    node = ex.rebuild(e, [distribute(a, reg) for a in e.args])
    if node.kind == ex.PROD:
        return _expand_product(node)
    if node.kind == ex.DERIV:
        return _expand_derivative(node)
    return node


def _expand_product(node):
    choices = [ex.terms_of(f) for f in node.args]
    if all(len(c) == 1 for c in choices):
        return node
    return ex.add(*(ex.mul(*combo) for combo in itertools.product(*choices)))


def _expand_derivative(node):
    out = []
    for t in ex.terms_of(node.args[0]):
        c, rest = ex.split_coeff(t)
        if rest.kind == ex.NUM:
            continue
        out.append(ex.mul(ex.num(c), ex.deriv(node.indices, rest, node.name)))
    return ex.add(*out)


# ---------------------------------------------------------------------------
# sort_product / collect_terms

def sort_product(e: ex.Expr, reg=ex.NULL_REGISTRY) -> ex.Expr:
    """Reorder commuting factors by the engine's total order (coefficient first)."""
    if not e.args or e.kind == ex.TABLE:
        return e
    node = ex.rebuild(e, [sort_product(a, reg) for a in e.args])
    if node.kind != ex.PROD:
        return node
    rank = _rank(reg)
    return ex.mul(*sorted(node.args, key=lambda f: ex.sort_key(f, rank)))


def collect_terms(e: ex.Expr, reg=ex.NULL_REGISTRY) -> ex.Expr:
    """Merge structurally identical terms; coefficients of lone integrands move outside."""
    if not e.args or e.kind == ex.TABLE:
        return e
    node = ex.rebuild(e, [collect_terms(a, reg) for a in e.args])
    if node.kind == ex.SUM:
        coeffs = {}
        for t in node.args:
            c, rest = ex.split_coeff(t)
            coeffs[rest] = coeffs.get(rest, Fraction(0)) + c
        return ex.add(*(ex.mul(ex.num(c), rest) for rest, c in coeffs.items() if c))
    if node.kind == ex.INT:
        body, var = node.args
        if body.kind != ex.SUM:
            c, rest = ex.split_coeff(body)
            if c != 1:
                return ex.mul(ex.num(c), ex.integral(rest, var))
    return node


# ---------------------------------------------------------------------------
# canonicalise

def canonicalise(e: ex.Expr, reg=ex.NULL_REGISTRY) -> ex.Expr:
    """Bring every term to a canonical representative under slot symmetries,
    dummy relabelling and raising/lowering of free-position dummy pairs."""
    k = e.kind
    if k in (ex.EQ, ex.RULE, ex.LIST):
        return ex.rebuild(e, [canonicalise(a, reg) for a in e.args])
    if k == ex.SUM:
        return ex.add(*(_canon_term(t, reg) for t in e.args))
    if k == ex.TABLE:
        return e
    return _canon_term(e, reg)


def _canon_integrals(e, reg):
    return ex.map_integrals(e, lambda i: ex.integral(canonicalise(i.args[0], reg), i.args[1]))


def _depends(e, reg) -> bool:
    return any(n.kind in (ex.SYM, ex.TABLE) and reg_depends(reg, n) for n in ex.walk(e))


def reg_depends(reg, node) -> bool:
    f = getattr(reg, "depends", None)
    return f is not None and f(node) is not None


def _vanishes(e, reg) -> bool:
    """True when a Derivative acts on something declared constant."""
    has = getattr(reg, "has", None)
    if has is None:
        return False
    for n in _walk_term(e):
        if n.kind == ex.DERIV and has(n, "Derivative") and not has(n, "PartialDerivative") \
                and not _depends(n.args[0], reg):
            return True
    return False


def _walk_term(e):
    """Nodes of a term, not entering nested sums, integrals or tables."""
    yield e
    if e.kind in (ex.SUM, ex.INT, ex.TABLE):
        return
    for a in e.args:
        yield from _walk_term(a)


def _symmetry(reg, node):
    f = getattr(reg, "symmetry", None)
    return None if f is None else f(node)


def _site_options(node, kind):
    n = len(node.indices)
    out = []
    for perm in itertools.permutations(range(n)):
        sign = 1
        if kind == "anti":
            inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
            sign = -1 if inversions % 2 else 1
        out.append((tuple(node.indices[p] for p in perm), sign))
    return out


def _replace_sites(e, sites, it):
    if e.kind == ex.SYM and e in sites:
        return ex.sym(e.name, next(it))
    if e.kind in (ex.SUM, ex.INT, ex.TABLE) or not e.args:
        return e
    return ex.rebuild(e, [_replace_sites(a, sites, it) for a in e.args])


def _sort_nested_products(e, skel):
    if e.kind in (ex.SUM, ex.INT, ex.TABLE) or not e.args:
        return e
    node = ex.rebuild(e, [_sort_nested_products(a, skel) for a in e.args])
    if node.kind == ex.PROD:
        return ex.mul(*sorted(node.args, key=skel))
    return node


def _canon_term(t, reg, avoid=frozenset()):
    c, body = ex.split_coeff(t)
    if body.kind == ex.NUM:
        return t
    body = _canon_integrals(body, reg)
    if _vanishes(body, reg):
        return ex.ZERO
    occ = []
    ex._occurrences(body, reg, occ)
    dummies = ex.dummy_names(body, reg)
    if not occ:
        return ex.mul(ex.num(c), _canon_nested_sums(body, reg, avoid))
    if len(occ) > MAX_CANON_INDICES:
        raise CanonicalisationLimitError(
            f"term has {len(occ)} indices; at most {MAX_CANON_INDICES} are supported")
    rank = _rank(reg)
    dummy_set = set(dummies)
    mask = {d: ("", False) for d in dummies}

    def skel(f):
        return ex.sort_key(ex.relabel(f, mask), rank)

    # symmetric slots reachable in this term, in reading order
    sites = []
    for n in _walk_term(body):
        if n.kind == ex.SYM and len(n.indices) > 1:
            kind = _symmetry(reg, n)
            if kind:
                sites.append(_site_options(n, kind))
    site_nodes = {n for n in _walk_term(body)
                  if n.kind == ex.SYM and len(n.indices) > 1 and _symmetry(reg, n)}
    flippable = [d for d in dummies if not reg.is_fixed(d)]
    taken = (ex.all_index_names(body) - dummy_set) | set(avoid)

    best = None
    best_signs = set()
    count = 0
    for choice in itertools.product(*sites):
        sign = 1
        for _, s in choice:
            sign *= s
        b1 = _replace_sites(body, site_nodes, iter(idx for idx, _ in choice)) if sites else body
        for flips in itertools.product((False, True), repeat=len(flippable)):
            b2 = ex.relabel(b1, {d: (d, True) for d, f in zip(flippable, flips) if f})
            b2 = _sort_nested_products(b2, skel)
            for cand in _orderings(b2, skel, reg, dummy_set, taken):
                count += 1
                if count > MAX_CANON_CANDIDATES:
                    raise CanonicalisationLimitError("too many candidate orderings")
                cand = _canon_nested_sums(cand, reg, taken | ex.all_index_names(cand))
                key = ex.sort_key(cand, rank)
                if best is None or key < best[0]:
                    best = (key, cand, sign)
                    best_signs = {sign}
                elif key == best[0]:
                    best_signs.add(sign)
    if len(best_signs) > 1:
        return ex.ZERO
    return ex.mul(ex.num(c * best[2]), best[1])


def _orderings(body, skel, reg, dummies, taken):
    """Skeleton-sorted factor orders (all permutations of ties) with dummies renamed."""
    factors = sorted(ex.factors_of(body), key=skel)
    groups = [list(g) for _, g in itertools.groupby(factors, key=skel)]
    for combo in itertools.product(*(itertools.permutations(g) for g in groups)):
        ordered = ex.mul(*(f for g in combo for f in g))
        order = []
        for i in ex.walk_indices(ordered, reg):
            if i.name in dummies and i.name not in order:
                order.append(i.name)
        names = ex.fresh_names(order, reg, taken)
        yield ex.relabel(ordered, {d: (n, False) for d, n in names.items()})


def _canon_nested_sums(e, reg, avoid):
    if e.kind == ex.SUM:
        return ex.add(*(_canon_term(t, reg, avoid) for t in e.args))
    if e.kind in (ex.INT, ex.TABLE) or not e.args:
        return e
    return ex.rebuild(e, [_canon_nested_sums(a, reg, avoid) for a in e.args])


# ---------------------------------------------------------------------------
# substitute / vary / integrate_by_parts

def _rule_sides(r: ex.Expr):
    if r.kind in (ex.EQ, ex.RULE):
        return r.args
    raise EngineError("expected a rule (a -> b) or an equation (a = b)")


def substitute(target: ex.Expr, r: ex.Expr, reg=ex.NULL_REGISTRY) -> ex.Expr:
    """Replace every occurrence of the rule's left side, inside integrals and derivatives too."""
    if r.kind == ex.LIST:
        for item in r.args:
            target = substitute(target, item, reg)
        return target
    lhs, rhs = _rule_sides(r)
    return ex.match_replace(target, lhs, rhs, reg)


def vary(target: ex.Expr, r: ex.Expr, reg=ex.NULL_REGISTRY) -> ex.Expr:
    """First-order variation: Leibniz rule with ``lhs`` replaced by ``rhs`` once per term."""
    lhs, rhs = _rule_sides(r)
    ex.check_rule_shape(lhs, rhs, reg)
    avoid = ex.all_index_names(target)

    def v(node):
        b = ex.match(lhs, node, reg)
        if b is not None:
            return ex.instantiate(rhs, b, reg, avoid)
        k = node.kind
        if k == ex.SUM:
            return ex.add(*(v(t) for t in node.args))
        if k == ex.PROD:
            return ex.add(*(ex.mul(*node.args[:i], v(f), *node.args[i + 1:])
                            for i, f in enumerate(node.args)))
        if k == ex.POW:
            base, x = node.args
            dv = v(base)
            if ex.is_zero(dv):
                return ex.ZERO
            if x.kind != ex.NUM:
                raise EngineError("cannot vary a symbolic power")
            return ex.mul(x, ex.power(base, x.value - 1), dv)
        if k in (ex.DERIV, ex.ACCENT):
            dv = v(node.args[0])
            return ex.ZERO if ex.is_zero(dv) else ex.rebuild(node, [dv])
        if k == ex.INT:
            return ex.integral(v(node.args[0]), node.args[1])
        if k == ex.FN and ex.contains_match(node, lhs, reg):
            raise EngineError(f"cannot vary inside {node.name}()")
        return ex.ZERO

    if target.kind in (ex.EQ, ex.LIST):
        return ex.rebuild(target, [v(a) for a in target.args])
    return v(target)


def integrate_by_parts(target: ex.Expr, marker: ex.Expr, reg=ex.NULL_REGISTRY) -> ex.Expr:
    """Move derivatives off the marker inside integrals, flipping the sign and
    dropping boundary terms."""
    def inside(i):
        body, var = i.args
        body = ex.map_integrals(body, inside) if body.kind != ex.INT else inside(body)
        new = ex.add(*(_ibp_term(t, marker, reg) for t in ex.terms_of(body)))
        return ex.ZERO if ex.is_zero(new) else ex.integral(new, var)
    return ex.map_integrals(target, inside)


def _ibp_term(t, marker, reg, limit=32):
    for _ in range(limit):
        c, body = ex.split_coeff(t)
        factors = list(ex.factors_of(body))
        pos = next((i for i, f in enumerate(factors)
                    if f.kind == ex.DERIV and ex.contains_match(f.args[0], marker, reg)), None)
        if pos is None:
            return t
        d = factors[pos]
        rest = ex.mul(*factors[:pos], *factors[pos + 1:])
        if rest.kind == ex.NUM:
            return ex.ZERO  # a total derivative integrates to a boundary term
        outer, inner_idx = d.indices[:1], d.indices[1:]
        inner = ex.deriv(inner_idx, d.args[0], d.name) if inner_idx else d.args[0]
        t = ex.mul(ex.num(-c), inner, ex.deriv(outer, rest, d.name))
    raise EngineError("integration by parts did not terminate")
