from __future__ import annotations

import math

import numpy as np
import pytest
from conftest import P
from oracles import eval_scalar, numeric_curvature

from tensorscript import components as cp
from tensorscript import expr as ex
from tensorscript import scalar as sk
from tensorscript.errors import (CannotEnumerateError, MissingPropertyError,
                                 SingularMetricError, UnknownHeadError)
from tensorscript.properties import Property, PropertyRegistry

INDEX_NAMES = [r"\alpha", r"\beta", r"\gamma", r"\rho", r"\sigma", r"\mu", r"\nu", r"\lambda"]
SPHERE = P(r"{g_{\theta\theta} = r**2, g_{\varphi\varphi} = r**2 \sin(\theta)**2}")


def coord_registry(coords, order=None):
    """Registry with fixed indices ranging over ``order`` (default ``coords``)."""
    order = order or coords
    reg = PropertyRegistry()
    reg = reg.attach_all([P("\\" + c if len(c) > 1 else c) for c in coords], Property("Coordinate"))
    values = [P("\\" + c if len(c) > 1 else c) for c in order]
    reg = reg.attach_all([P(n) for n in INDEX_NAMES],
                         Property("Indices", {"position": "fixed", "values": values}))
    reg = reg.attach(P(r"\partial{#}"), Property("PartialDerivative"))
    reg = reg.attach(P(r"g_{\alpha\beta}"), Property("Metric"))
    return reg.attach(P(r"g^{\alpha\beta}"), Property("InverseMetric"))


def sphere_registry():
    return coord_registry(["theta", "varphi"], ["varphi", "theta"])


def table(e):
    """{tuple of index values: rhs} for ``lhs = {...}`` or a bare table."""
    t = e.rhs if e.kind == ex.EQ else e
    return {tuple(i.name for i in en.lhs.indices): en.rhs for en in t.args}


def entries_by_head(rules):
    out = {}
    for en in cp.rule_entries(rules):
        key = (en.lhs.name, tuple(i.up for i in en.lhs.indices))
        out.setdefault(key, {})[tuple(i.name for i in en.lhs.indices)] = en.rhs
    return out


def same(a, b):
    return ex.is_zero(sk.trig_normalize(ex.add(a, ex.neg(b))))


class TestComplete:
    def test_sphere(self):
        got = entries_by_head(cp.complete(SPHERE, P(r"g^{\alpha\beta}"), sphere_registry()))
        inv = got[("g", (True, True))]
        assert set(inv) == {("varphi", "varphi"), ("theta", "theta")}
        assert inv[("theta", "theta")] == P("r**(-2)")
        assert same(inv[("varphi", "varphi")], P(r"r**(-2) \sin(\theta)**(-2)"))
        assert len(got[("g", (False, False))]) == 2

    def test_declared_order(self):
        out = cp.complete(SPHERE, P(r"g^{\alpha\beta}"), sphere_registry())
        ups = [en.lhs for en in out.args if en.lhs.indices[0].up]
        assert [i.name for i in ups[0].indices] == ["varphi", "varphi"]

    def test_identity(self):
        reg = coord_registry(["x", "y"])
        out = entries_by_head(cp.complete(P("{g_{x x} = 1, g_{y y} = 1}"), P(r"g^{\alpha\beta}"), reg))
        assert out[("g", (True, True))] == {("x", "x"): ex.ONE, ("y", "y"): ex.ONE}

    def test_off_diagonal(self):
        reg = coord_registry(["x", "y"])
        rules = P("{g_{x x} = a, g_{x y} = c, g_{y x} = c, g_{y y} = b}")
        inv = entries_by_head(cp.complete(rules, P(r"g^{\alpha\beta}"), reg))[("g", (True, True))]
        env = {"a": 2.0, "b": 3.0, "c": 0.5}
        m = np.linalg.inv(np.array([[2.0, 0.5], [0.5, 3.0]]))
        for (i, j), v in inv.items():
            k = {"x": 0, "y": 1}
            assert math.isclose(eval_scalar(v, env), m[k[i], k[j]], rel_tol=1e-12)

    def test_singular(self):
        reg = coord_registry(["x", "y"])
        with pytest.raises(SingularMetricError):
            cp.complete(P("{g_{x x} = 1, g_{x y} = 1, g_{y x} = 1, g_{y y} = 1}"),
                        P(r"g^{\alpha\beta}"), reg)

    def test_needs_inverse_metric_property(self):
        reg = coord_registry(["x", "y"])
        with pytest.raises(MissingPropertyError):
            cp.complete(P("{h_{x x} = 1}"), P(r"h^{\alpha\beta}"), reg)


class TestEvaluate:
    @pytest.fixture
    def rules(self):
        return cp.complete(SPHERE, P(r"g^{\alpha\beta}"), sphere_registry())

    def test_christoffel(self, rules):
        got = table(cp.christoffel(rules, sphere_registry()))
        assert set(got) == {("varphi", "varphi", "theta"), ("varphi", "theta", "varphi"),
                            ("theta", "varphi", "varphi")}
        assert same(got[("theta", "varphi", "varphi")], P(r"-\sin(\theta) \cos(\theta)"))
        assert same(got[("varphi", "varphi", "theta")], P(r"\cos(\theta) \sin(\theta)**(-1)"))

    def test_christoffel_lower_symmetry(self, rules):
        got = table(cp.christoffel(rules, sphere_registry()))
        for (a, m, n), v in got.items():
            assert same(v, got.get((a, n, m), ex.ZERO))

    def test_trace(self, rules):
        assert cp.evaluate(P(r"g_{\alpha\beta} g^{\alpha\beta}"), rules, sphere_registry()) == P("2")

    def test_kronecker(self, rules):
        got = table(cp.evaluate(P(r"g_{\alpha\beta} g^{\beta\gamma}"), rules, sphere_registry()))
        assert got == {("varphi", "varphi"): ex.ONE, ("theta", "theta"): ex.ONE}

    def test_zero_table(self, rules):
        got = cp.evaluate(P(r"\partial_{\varphi}{g_{\alpha\beta}}"), rules, sphere_registry())
        assert ex.is_zero(got)  # an all-zero table collapses to 0

    def test_scalar_target(self, rules):
        reg = sphere_registry()
        assert cp.evaluate(P(r"\partial_{\theta}{g_{\theta\theta}}"), rules, reg) == ex.ZERO

    def test_abstract_indices_cannot_enumerate(self):
        reg = PropertyRegistry().attach_all([P(r"\mu"), P(r"\nu")],
                                            Property("Indices", {"position": "free"}))
        with pytest.raises(CannotEnumerateError):
            cp.evaluate(P(r"A_{\mu} B^{\mu}"), P("{A_{x} = 1}"), reg)

    def test_unknown_head(self, rules):
        with pytest.raises(UnknownHeadError):
            cp.evaluate(P(r"h_{\alpha\beta} g^{\alpha\beta}"), rules, sphere_registry())

    def test_riemann_antisymmetric_in_last_pair(self, rules):
        got = table(cp.riemann_pipeline(rules, sphere_registry()))
        assert got
        for (r, s, m, n), v in got.items():
            assert same(v, ex.neg(got.get((r, s, n, m), ex.ZERO)))

    def test_sphere_scalar(self, rules):
        _, r = cp.ricci_and_scalar(rules, sphere_registry())
        assert r == P("2 r**(-2)")


def test_flat_polar_is_flat():
    reg = coord_registry(["r", "phi"])
    rules = cp.complete(P(r"{g_{r r} = 1, g_{\phi\phi} = r**2}"), P(r"g^{\alpha\beta}"), reg)
    assert not table(cp.riemann_pipeline(rules, reg))
    ricci, scalar = cp.ricci_and_scalar(rules, reg)
    assert ex.is_zero(scalar) and not table(ricci)


@pytest.mark.parametrize("point", [(0.3, 1.1), (1.2, 0.4), (0.8, 2.0)])
def test_off_diagonal_metric_matches_finite_differences(point):
    # g = [[1 + v**2, u v], [u v, 2 + u**2]]; a generic non-diagonal metric
    reg = coord_registry(["u", "v"])
    rules = cp.complete(P("{g_{u u} = 1 + v**2, g_{u v} = u v, g_{v u} = u v, g_{v v} = 2 + u**2}"),
                        P(r"g^{\alpha\beta}"), reg)
    gam = table(cp.christoffel(rules, reg))
    riem = table(cp.riemann_pipeline(rules, reg))

    def metric(x):
        u, v = x
        return np.array([[1 + v * v, u * v], [u * v, 2 + u * u]])

    ng, nr = numeric_curvature(metric, point)
    env = {"u": point[0], "v": point[1]}
    k = {"u": 0, "v": 1}
    for a in "uv":
        for m in "uv":
            for n in "uv":
                got = eval_scalar(gam.get((a, m, n), ex.ZERO), env)
                assert math.isclose(got, ng[k[a], k[m], k[n]], rel_tol=1e-6, abs_tol=1e-8)
                for s in "uv":
                    got = eval_scalar(riem.get((a, s, m, n), ex.ZERO), env)
                    assert math.isclose(got, nr[k[a], k[s], k[m], k[n]], rel_tol=1e-4, abs_tol=1e-6)
