"""Component computations: inverse-metric completion and evaluation of
abstract-index expressions over declared coordinate values."""
from __future__ import annotations

import itertools

from . import expr as ex
from . import scalar as sk
from .errors import (CannotEnumerateError, EngineError, MissingPropertyError,
                     NoValuesError, SingularMetricError, UnknownHeadError)

TABLE_NAME = "components"


# ---------------------------------------------------------------------------
# component rules

def rule_entries(rules: ex.Expr) -> list:
    """Flatten a rules expression (list / equation / table) into assignment equations."""
    if rules.kind == ex.LIST:
        return [e for item in rules.args for e in rule_entries(item)]
    if rules.kind == ex.TABLE:
        return list(rules.args)
    if rules.kind == ex.EQ:
        if rules.rhs.kind == ex.TABLE:
            return list(rules.rhs.args)
        if rules.lhs.kind == ex.SYM and rules.lhs.indices:
            return [rules]
    raise EngineError("component rules must be assignments such as g_{t t} = 1")


class ComponentStore:
    """(head, variance) -> {coordinate tuple: value}."""

    def __init__(self, entries, reg):
        self.reg = reg
        self.data = {}
        for eq in entries:
            lhs = eq.lhs
            key = (lhs.name, tuple(i.up for i in lhs.indices))
            values = tuple(i.name for i in lhs.indices)
            slot = self.data.setdefault(key, {})
            if values in slot:
                raise EngineError(f"duplicate component assignment for {lhs!r}")
            slot[values] = eq.rhs

    def lookup(self, name, ups, values):
        key = (name, tuple(ups))
        if key not in self.data:
            raise UnknownHeadError(f"no components known for {name}")
        slot = self.data[key]
        if values in slot:
            return slot[values]
        if len(values) == 2 and self._symmetric(name, ups):
            return slot.get(values[::-1], ex.ZERO)
        return ex.ZERO

    def _symmetric(self, name, ups):
        node = ex.sym(name, [ex.Index(f"_{k}", u) for k, u in enumerate(ups)])
        has = getattr(self.reg, "has", None)
        if has is None:
            return False
        return any(has(node, p) for p in ("Metric", "InverseMetric", "Symmetric"))


def _values(reg, name):
    try:
        return reg.index_values(name)
    except NoValuesError:
        raise CannotEnumerateError(f"index {name} has no declared values") from None


# ---------------------------------------------------------------------------
# complete

def _det(m):
    n = len(m)
    if n == 1:
        return m[0][0]
    terms = []
    for j in range(n):
        if ex.is_zero(m[0][j]):
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        sign = ex.num(-1 if j % 2 else 1)
        terms.append(ex.mul(sign, m[0][j], _det(minor)))
    return sk.simplify(ex.add(*terms))


def complete(rules: ex.Expr, pattern: ex.Expr, reg) -> ex.Expr:
    """Append inverse-metric components (cofactor inverse) to the rules."""
    if not reg.has(pattern, "InverseMetric"):
        raise MissingPropertyError(f"{pattern!r} has no InverseMetric property")
    entries = rule_entries(rules)
    ups = tuple(i.up for i in pattern.indices)
    metric_ups = tuple(not u for u in ups)
    coords = _values(reg, pattern.indices[0].name)
    store = ComponentStore([e for e in entries if e.lhs.name == pattern.name
                            and tuple(i.up for i in e.lhs.indices) == metric_ups], reg)
    if (pattern.name, metric_ups) not in store.data:
        raise EngineError(f"no metric components for {pattern.name}")
    n = len(coords)

    def g(a, b):
        slot = store.data[(pattern.name, metric_ups)]
        return slot.get((a, b), slot.get((b, a), ex.ZERO))

    m = [[g(a, b) for b in coords] for a in coords]
    det = _det(m)
    if ex.is_zero(det):
        raise SingularMetricError("metric determinant simplifies to zero")
    inv_det = ex.power(det, -1)
    new = []
    for i, a in enumerate(coords):
        for j, b in enumerate(coords):
            minor = [row[:i] + row[i + 1:] for k, row in enumerate(m) if k != j]
            cof = _det(minor) if n > 1 else ex.ONE
            value = sk.simplify(ex.mul(ex.num(-1 if (i + j) % 2 else 1), cof, inv_det))
            if not ex.is_zero(value):
                lhs = ex.sym(pattern.name, [ex.Index(a, ups[0]), ex.Index(b, ups[1])])
                new.append(ex.equation(lhs, value))
    kept = [e for e in entries
            if not (e.lhs.name == pattern.name and tuple(i.up for i in e.lhs.indices) == ups)]
    return ex.lst(kept + new)


# ---------------------------------------------------------------------------
# evaluate

class _Evaluator:
    def __init__(self, store, reg):
        self.store = store
        self.reg = reg

    def concrete(self, idx, assign):
        if self.reg.is_coordinate(idx.name):
            return idx.name
        return assign[idx.name]

    def value(self, node, assign) -> ex.Expr:
        if node.kind != ex.SUM:
            occ = []
            ex._occurrences(node, self.reg, occ)
            todo = []
            for i in occ:
                if i.name not in assign and i.name not in todo:
                    todo.append(i.name)
            if todo:
                out = []
                for combo in itertools.product(*(_values(self.reg, n) for n in todo)):
                    out.append(self.value(node, {**assign, **dict(zip(todo, combo))}))
                return sk.simplify(ex.add(*out))
        return self._value(node, assign)

    def _value(self, node, assign):
        k = node.kind
        if k == ex.NUM:
            return node
        if k == ex.SYM:
            if not node.indices:
                return node
            values = tuple(self.concrete(i, assign) for i in node.indices)
            return self.store.lookup(node.name, [i.up for i in node.indices], values)
        if k == ex.TABLE:
            values = tuple(self.concrete(i, assign) for i in node.indices)
            for entry in node.args:
                if tuple(i.name for i in entry.lhs.indices) == values:
                    return entry.rhs
            return ex.ZERO
        if k == ex.SUM:
            return ex.add(*(self.value(t, assign) for t in node.args))
        if k == ex.PROD:
            return ex.mul(*(self.value(f, assign) for f in node.args))
        if k == ex.POW:
            return ex.power(self.value(node.args[0], assign), self.value(node.args[1], assign))
        if k == ex.FN:
            return ex.fn(node.name, self.value(node.args[0], assign))
        if k == ex.DERIV:
            inner = sk.simplify(self.value(node.args[0], assign))
            for i in node.indices:
                if i.up:
                    raise EngineError("cannot evaluate a derivative with an upper index")
                inner = sk.diff(inner, self.concrete(i, assign))
            return inner
        raise EngineError(f"cannot evaluate a {k} node on components")


def _table_for(lhs, rhs, ev, reg):
    """Component table ``lhs = {...}`` for an index-carrying left side."""
    slots = [i for i in lhs.indices if not reg.is_coordinate(i.name)]
    entries = []
    for combo in itertools.product(*(_values(reg, i.name) for i in slots)):
        assign = {i.name: v for i, v in zip(slots, combo)}
        val = sk.simplify(ev.value(rhs, assign))
        if not ex.is_zero(val):
            concrete = [ex.Index(ev.concrete(i, assign), i.up) for i in lhs.indices]
            entries.append(ex.equation(ex.sym(lhs.name, concrete), val))
    return ex.table(lhs.name, lhs.indices, entries)


def evaluate(target: ex.Expr, rules: ex.Expr, reg, rhsonly: bool = False) -> ex.Expr:
    """Expand ``target`` into components using the assignments in ``rules``.

    Unassigned components count as zero; dummy pairs become explicit sums over
    the declared index values and partial derivatives act on the entries.
    """
    entries = rule_entries(rules) if rules is not None else []
    ev = _Evaluator(ComponentStore(entries, reg), reg)
    if target.kind == ex.EQ:
        lhs, rhs = target.args
        if rhsonly:
            if lhs.kind == ex.SYM and lhs.indices:
                return ex.equation(lhs, _table_for(lhs, rhs, ev, reg))
            return ex.equation(lhs, sk.simplify(ev.value(rhs, {})))
        return ex.equation(evaluate(lhs, rules, reg), evaluate(rhs, rules, reg))
    free = ex.free_indices(target, reg)
    if not free:
        return sk.simplify(ev.value(target, {}))
    head = ex.sym(TABLE_NAME, free)
    return _table_for(head, target, ev, reg)


# ---------------------------------------------------------------------------
# curvature conveniences

CHRISTOFFEL = (r"\Gamma^{\alpha}_{\mu\nu} = 1/2 g^{\alpha\beta} (\partial_{\nu}{g_{\beta\mu}}"
               r" + \partial_{\mu}{g_{\beta\nu}} - \partial_{\beta}{g_{\mu\nu}})")
RIEMANN = (r"R^{\rho}_{\sigma\mu\nu} = \partial_{\mu}{\Gamma^{\rho}_{\sigma\nu}}"
           r" - \partial_{\nu}{\Gamma^{\rho}_{\sigma\mu}}"
           r" + \Gamma^{\rho}_{\beta\mu} \Gamma^{\beta}_{\sigma\nu}"
           r" - \Gamma^{\rho}_{\beta\nu} \Gamma^{\beta}_{\sigma\mu}")
RICCI = r"R_{\sigma\nu} = R^{\rho}_{\sigma\rho\nu}"
SCALAR = r"R = R_{\sigma\nu} g^{\sigma\nu}"


def christoffel(rules: ex.Expr, reg) -> ex.Expr:
    from .notation import parse_expression
    out = evaluate(parse_expression(CHRISTOFFEL), rules, reg, rhsonly=True)
    return sk.map_scalar(out, sk.trig_normalize)


def riemann_pipeline(rules: ex.Expr, reg) -> ex.Expr:
    """Riemann components from metric rules (which must include the inverse)."""
    from .notation import parse_expression
    from .rewrite import substitute
    gamma = christoffel(rules, reg)
    r4 = substitute(parse_expression(RIEMANN), gamma, reg)
    return evaluate(r4, rules, reg, rhsonly=True)


def ricci_and_scalar(rules: ex.Expr, reg, riemann: ex.Expr = None):
    """(Ricci equation, scalar curvature) from metric rules."""
    from .notation import parse_expression
    from .rewrite import substitute
    riemann = riemann if riemann is not None else riemann_pipeline(rules, reg)
    r2 = evaluate(substitute(parse_expression(RICCI), riemann, reg), rules, reg, rhsonly=True)
    r0 = evaluate(substitute(parse_expression(SCALAR), r2, reg), rules, reg, rhsonly=True)
    return r2, r0.rhs
