from __future__ import annotations

import random

import numpy as np
import pytest
from conftest import P, free_registry
from oracles import ContractionOracle, random_sum, random_term

from tensorscript import expr as ex
from tensorscript import rewrite as rw
from tensorscript.errors import CanonicalisationLimitError, RuleShapeError
from tensorscript.properties import Property

FIELD_STRENGTH = P(r"F_{\mu\nu} = \partial_{\mu}{A_{\nu}} - \partial_{\nu}{A_{\mu}}")
VARY_A = P(r"A_{\mu} -> \delta{A_{\mu}}")


def close(a, b):
    np.testing.assert_allclose(a, b, rtol=1e-8, atol=1e-8)


def simplify(e, reg):
    return rw.collect_terms(rw.canonicalise(rw.distribute(e, reg), reg), reg)


class TestDistribute:
    def test_product_over_sum(self):
        assert rw.distribute(P("A (B + C)")) == P("A B + A C")

    def test_derivative_over_sum(self):
        got = rw.distribute(P(r"\partial_{\mu}{A_{\nu} + 2 B_{\nu}}"))
        assert got == P(r"\partial_{\mu}{A_{\nu}} + 2 \partial_{\mu}{B_{\nu}}")

    def test_inside_integral(self):
        assert rw.distribute(P(r"\int{a (b+c)}{x}")) == P(r"\int{a b + a c}{x}")

    def test_nested(self):
        got = rw.distribute(P("(a + b)(c + d)"))
        assert got == P("a c + a d + b c + b d")

    @pytest.mark.parametrize("seed", range(15))
    def test_value_preserved(self, seed):
        rng = random.Random(seed)
        free = [ex.Index("mu")]
        e = ex.mul(random_term(rng, free), ex.add(*(random_term(rng, []) for _ in range(2))))
        o = ContractionOracle(seed)
        close(o.value(rw.distribute(e)), o.value(e))


class TestSortProduct:
    def test_alphabetical(self):
        assert rw.sort_product(P(r"B_{\mu} A^{\mu}")) == P(r"A^{\mu} B_{\mu}")

    def test_coefficient_first(self):
        assert rw.sort_product(P("b 3 a")) == P("3 a b")

    def test_idempotent(self):
        e = rw.sort_product(P(r"\partial_{\mu}{A_{\nu}} F^{\mu\nu} x"))
        assert rw.sort_product(e) == e


class TestCollectTerms:
    def test_merge(self):
        assert rw.collect_terms(P("2 a b + 3 a b + a")) == P("5 a b + a")

    def test_cancel(self):
        assert ex.is_zero(rw.collect_terms(P(r"F_{\mu\nu} - F_{\mu\nu}")))

    def test_order_sensitive_without_sort(self):
        # a b and b a are different products until sorted
        assert rw.collect_terms(P("a b + b a")) == P("a b + b a")

    def test_after_sort(self):
        assert rw.collect_terms(rw.sort_product(P("a b + b a"))) == P("2 a b")


class TestCanonicalise:
    def test_antisymmetric_sum_vanishes(self, reg):
        e = rw.canonicalise(P(r"F_{\mu\nu} + F_{\nu\mu}"), reg)
        assert ex.is_zero(rw.collect_terms(e, reg))

    def test_sym_antisym_contraction(self, reg):
        assert ex.is_zero(rw.canonicalise(P(r"F_{\mu\nu} S^{\mu\nu}"), reg))

    def test_dummy_relabelling(self, reg):
        e = rw.canonicalise(P(r"A_{\sigma} B^{\sigma} - A^{\rho} B_{\rho}"), reg)
        assert ex.is_zero(rw.collect_terms(e, reg))

    def test_sign_from_swap(self, reg):
        got = rw.canonicalise(P(r"F_{\nu\mu} A^{\mu}"), reg)
        assert got == P(r"-A^{\mu} F_{\mu\nu}")

    def test_derivative_without_dependence_vanishes(self):
        reg = free_registry().attach(P(r"\partial{#}"), Property("Derivative"))
        assert ex.is_zero(rw.canonicalise(P(r"\partial_{\mu}{B_{\nu}}"), reg))
        reg = reg.attach(P(r"B_{\mu}"), Property("Depends", {}, (P("x"),)))
        assert not ex.is_zero(rw.canonicalise(P(r"\partial_{\mu}{B_{\nu}}"), reg))

    def test_too_many_factors(self, reg):
        e = ex.mul(*(ex.sym("A", [ex.Index(n, k % 2 == 0)])
                     for k, n in enumerate(["mu", "mu", "nu", "nu", "rho", "rho",
                                            "sigma", "sigma", "tau", "tau"])))
        with pytest.raises(CanonicalisationLimitError):
            rw.canonicalise(e, reg)

    @pytest.mark.parametrize("seed", range(60))
    def test_idempotent_and_value_preserving(self, seed):
        reg = free_registry()
        e = random_sum(random.Random(seed))
        once = rw.canonicalise(e, reg)
        assert rw.canonicalise(once, reg) == once
        o = ContractionOracle(seed)
        close(o.value(once), o.value(e))

    @pytest.mark.parametrize("seed", range(30))
    def test_renamed_copies_agree(self, seed):
        # a term and a dummy-renamed, factor-shuffled copy canonicalise alike
        rng = random.Random(seed)
        reg = free_registry()
        t = random_term(rng, [ex.Index("kappa")], dummies=2)
        mapping = {n: (f"z{k}", False) for k, n in enumerate(ex.dummy_names(t))}
        c, body = ex.split_coeff(ex.relabel(t, mapping))
        factors = list(ex.factors_of(body))
        rng.shuffle(factors)
        copy = ex.mul(ex.num(c), *factors)
        assert rw.canonicalise(copy, reg) == rw.canonicalise(t, reg)


class TestSubstitute:
    def test_field_strength(self, reg):
        got = rw.substitute(P(r"F_{\mu\nu} F^{\mu\nu}"), FIELD_STRENGTH, reg)
        want = P(r"(\partial_{\mu}{A_{\nu}} - \partial_{\nu}{A_{\mu}})"
                 r"(\partial^{\mu}{A^{\nu}} - \partial^{\nu}{A^{\mu}})")
        assert got == want

    def test_rule_list(self):
        got = rw.substitute(P("a + b"), P("{a -> c, b -> d}"))
        assert got == P("c + d")

    def test_no_match(self):
        assert rw.substitute(P("a + b"), P("z -> 1")) == P("a + b")

    def test_bad_rule(self):
        with pytest.raises(RuleShapeError):
            rw.substitute(P(r"A_{\mu}"), P(r"A_{\mu} -> B_{\nu}"))

    @pytest.mark.parametrize("seed", range(30))
    def test_value_preserved(self, seed):
        reg = free_registry()
        e = random_sum(random.Random(seed))
        o = ContractionOracle(seed)
        da = o.array(ContractionOracle.key(P(r"\partial_{a}{A_{b}}")), 2)
        dda = o.array(ContractionOracle.key(P(r"\partial_{a}{\partial_{b}{A_{c}}}")), 3)
        o.define(("sym", "F", 2), da - da.T)
        o.define(ContractionOracle.key(P(r"\partial_{a}{F_{b c}}")),
                 dda - np.swapaxes(dda, 1, 2))
        close(o.value(rw.substitute(e, FIELD_STRENGTH, reg)), o.value(e))


class TestVary:
    def test_product_rule(self, reg):
        got = rw.vary(P(r"A_{\mu} A^{\mu}"), VARY_A, reg)
        assert got == P(r"\delta{A_{\mu}} A^{\mu} + A_{\mu} \delta{A^{\mu}}")

    def test_under_derivative_and_integral(self, reg):
        got = rw.vary(P(r"\int{\partial_{\mu}{A_{\nu}} B^{\mu\nu}}{x}"), VARY_A, reg)
        assert got == P(r"\int{\partial_{\mu}{\delta{A_{\nu}}} B^{\mu\nu}}{x}")

    def test_independent_term(self, reg):
        assert ex.is_zero(rw.vary(P(r"B_{\mu} B^{\mu}"), VARY_A, reg))

    def test_power(self):
        assert rw.vary(P("a**3"), P(r"a -> \delta{a}")) == P(r"3 a**2 \delta{a}")

    def test_linear(self, reg):
        a = P(r"A_{\mu} B^{\mu}")
        b = P(r"A_{\nu} A_{\rho} S^{\nu\rho}")
        lhs = rw.vary(ex.add(a, ex.mul(ex.num(3), b)), VARY_A, reg)
        rhs = ex.add(rw.vary(a, VARY_A, reg), ex.mul(ex.num(3), rw.vary(b, VARY_A, reg)))
        assert ex.is_zero(simplify(ex.add(lhs, ex.mul(ex.num(-1), rhs)), reg))

    @pytest.mark.parametrize("seed", range(30))
    def test_first_order_change(self, seed):
        reg = free_registry()
        e = random_sum(random.Random(seed))
        varied = rw.vary(e, VARY_A, reg)
        o = ContractionOracle(seed)
        o.value(e)
        o.value(varied)
        eps = 1e-5
        fd = (o.perturbed(eps=eps).value(e) - o.perturbed(eps=-eps).value(e)) / (2 * eps)
        np.testing.assert_allclose(o.value(varied), fd, rtol=1e-6, atol=1e-6)


class TestIntegrateByParts:
    def test_moves_derivative(self, reg):
        got = rw.integrate_by_parts(P(r"\int{B^{\mu\nu} \partial_{\mu}{f_{\nu}}}{x}"), P("f_{a}"), reg)
        assert got == P(r"\int{-f_{\nu} \partial_{\mu}{B^{\mu\nu}}}{x}")

    def test_total_derivative_drops(self, reg):
        got = rw.integrate_by_parts(P(r"\int{\partial_{\mu}{f^{\mu}}}{x}"), P("f_{a}"), reg)
        assert ex.is_zero(got)

    def test_twice_restores_sign(self, reg):
        e = P(r"\int{B \partial_{\mu}{\partial_{\nu}{f}}}{x}")
        got = rw.integrate_by_parts(e, P("f"), reg)
        assert got == P(r"\int{f \partial_{\nu}{\partial_{\mu}{B}}}{x}")

    def test_outside_integral_untouched(self, reg):
        e = P(r"B^{\mu} \partial_{\mu}{f}")
        assert rw.integrate_by_parts(e, P("f"), reg) == e

    def test_marker_absent(self, reg):
        e = P(r"\int{B^{\mu} \partial_{\mu}{C}}{x}")
        assert rw.integrate_by_parts(e, P("f"), reg) == e
