"""Imperative sessions: labels, the last result ``_``, the post-process hook
and the operations callable from scripts."""
from __future__ import annotations

from . import components as cp
from . import expr as ex
from . import rewrite as rw
from . import scalar as sk
from .errors import (EngineError, NotScalarError, StatementError, UnknownFunctionError,
                     UnknownLabelError, UnknownOperationError)
from .notation import Arg, Statement, parse_statement, split_script
from .printing import printer_for
from .properties import PropertyRegistry

DEFAULT_POST_PROCESS = ("sort_product", "canonicalise", "collect_terms")

# operations usable in the post-process hook: name -> f(expr, reg)
PIPELINE_OPS = {
    "sort_product": rw.sort_product,
    "canonicalise": rw.canonicalise,
    "canonicalize": rw.canonicalise,
    "collect_terms": rw.collect_terms,
    "distribute": rw.distribute,
    "rename_dummies": ex.rename_dummies,
}


class Session:
    """Mutable state of one script or REPL run."""

    def __init__(self, mode: str = "plain", post_process=DEFAULT_POST_PROCESS):
        self.registry = PropertyRegistry()
        self.bindings: dict = {}
        self.last: ex.Expr = ex.ZERO
        self.last_label = None  # label that ``_`` currently stands for
        self.mode = mode
        self.post_process = list(post_process)
        self.printer = printer_for(mode)
        self.displayed: list = []  # expressions shown so far, in order

    # -- helpers -----------------------------------------------------------

    def show(self, e: ex.Expr) -> str:
        return self.printer(e)

    def resolve(self, name: str) -> ex.Expr:
        if name == "_":
            return self.last
        try:
            return self.bindings[name]
        except KeyError:
            raise UnknownLabelError(f"unknown label {name}") from None

    def value_of(self, arg: Arg) -> ex.Expr:
        if arg.kind == "ref":
            return self.resolve(arg.value)
        if arg.kind == "expr":
            return arg.value
        raise EngineError(f"expected an expression, got {arg.value!r}")

    def apply_post_process(self, e: ex.Expr) -> ex.Expr:
        for name in self.post_process:
            e = PIPELINE_OPS[name](e, self.registry)
        return e

    def set_post_process(self, names) -> None:
        for n in names:
            if n not in PIPELINE_OPS:
                raise UnknownOperationError(f"unknown post-process operation {n}")
        self.post_process = list(names)

    def _result(self, value, target: Arg = None, rebind=True) -> ex.Expr:
        value = self.apply_post_process(value)
        label = None
        if target is not None and target.kind == "ref":
            label = self.last_label if target.value == "_" else target.value
        if rebind and label is not None:
            self.bindings[label] = value
        self._set_last(value, label if rebind else None)
        return value

    def _set_last(self, value, label=None):
        self.last = value
        self.last_label = label

    # -- statements --------------------------------------------------------

    def run_statement(self, st: Statement):
        """Execute one statement; return the display text or None."""
        try:
            out = self._run(st)
        except StatementError:
            raise
        except EngineError as err:
            raise StatementError(str(err), st.line, st.text) from err
        if not st.display or out is None:
            return None
        if isinstance(out, ex.Expr):
            self.displayed.append(out)
            return self.show(out)
        return out

    def _run(self, st: Statement):
        if st.kind == "attach":
            self.registry = self.registry.attach_all(st.objects, st.prop)
            objs = st.objects[0] if len(st.objects) == 1 else None
            where = self.show(objs) if objs is not None else \
                "[" + ", ".join(self.show(o) for o in st.objects) + "]"
            return f"Attached property {st.prop.label()} to {where}."
        if st.kind == "assign":
            value = self.apply_post_process(st.expr)
            self.bindings[st.label] = value
            self._set_last(value, st.label)
            return value
        if st.kind == "show":
            if st.label == "_":
                return self.last
            if st.label is not None and st.label in self.bindings:
                self._set_last(self.bindings[st.label], st.label)
            else:
                self._set_last(self.apply_post_process(st.expr))
            return self.last
        return self.call(st.op, st.args)

    def call(self, op: str, args: list):
        f = getattr(self, "op_" + op, None)
        if f is None:
            raise UnknownOperationError(f"unknown operation {op}")
        pos = [a for a in args if a.kind != "kw"]
        kw = {a.key: a.value for a in args if a.kind == "kw"}
        return f(*pos, **kw)

    def run_text(self, text: str) -> list:
        """Run every statement of a script; return the displayed lines."""
        out = []
        for chunk, line in split_script(text):
            try:
                st = parse_statement(chunk, line)
            except EngineError as err:
                raise StatementError(str(err), line, chunk) from err
            shown = self.run_statement(st)
            if shown is not None:
                out.append(shown)
        return out

    # -- rewrite operations ------------------------------------------------

    def _unary(self, f, target):
        return self._result(f(self.value_of(target), self.registry), target)

    def op_distribute(self, target):
        return self._unary(rw.distribute, target)

    def op_sort_product(self, target):
        return self._unary(rw.sort_product, target)

    def op_canonicalise(self, target):
        return self._unary(rw.canonicalise, target)

    op_canonicalize = op_canonicalise

    def op_collect_terms(self, target):
        return self._unary(rw.collect_terms, target)

    def op_rename_dummies(self, target):
        return self._unary(ex.rename_dummies, target)

    def op_substitute(self, target, rule):
        return self._result(rw.substitute(self.value_of(target), self.value_of(rule),
                                          self.registry), target)

    def op_vary(self, target, rule):
        return self._result(rw.vary(self.value_of(target), self.value_of(rule),
                                    self.registry), target)

    def op_integrate_by_parts(self, target, marker):
        return self._result(rw.integrate_by_parts(self.value_of(target), self.value_of(marker),
                                                  self.registry), target)

    # -- components --------------------------------------------------------

    def op_complete(self, rules, pattern):
        return self._result(cp.complete(self.value_of(rules), self.value_of(pattern),
                                        self.registry), rules)

    def op_evaluate(self, target, rules=None, rhsonly=False):
        rule_expr = None if rules is None else self.value_of(rules)
        return self._result(cp.evaluate(self.value_of(target), rule_expr, self.registry,
                                        rhsonly=bool(rhsonly)), target)

    # -- scalar bridge -----------------------------------------------------

    def _scalar_fn(self, name):
        coords = self.registry.coordinates()
        if name is None:
            return sk.kernel_eval
        if name not in sk.SCALAR_FUNCTIONS:
            raise UnknownFunctionError(f"unknown scalar function {name!r}")

        def f(s):
            try:
                return sk.scalar_call(name, s, coords)
            except EngineError:
                if name == "integrate":
                    return s  # unsupported integrand: leave it unevaluated
                raise
        return f

    def op_map_scalar(self, target, fn_name=None):
        """Apply a kernel function to every scalar part; rebinds the target."""
        name = None if fn_name is None else str(fn_name.value)
        return self._result(sk.map_scalar(self.value_of(target), self._scalar_fn(name)), target)

    def op_to_scalar(self, target):
        """Kernel-evaluated value of the target; bindings stay as they are."""
        value = self.value_of(target)
        if not sk.is_scalar(value):
            raise NotScalarError("expression has tensor content")
        return self._result(sk.kernel_eval(value), rebind=False)

    def op_scalar_call(self, fn_name, target):
        value = self.value_of(target)
        if not sk.is_scalar(value):
            raise NotScalarError("expression has tensor content")
        return self._result(sk.scalar_call(str(fn_name.value), value,
                                           self.registry.coordinates()), rebind=False)

    # -- session control ---------------------------------------------------

    def op_set_post_process(self, *names):
        self.set_post_process([a.value for a in names])
        return None


def run_script(text: str, mode: str = "plain", post_process=DEFAULT_POST_PROCESS) -> list:
    return Session(mode, post_process).run_text(text)
