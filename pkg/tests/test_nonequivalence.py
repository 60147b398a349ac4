import math

import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from bellstat.errors import DegenerateError, DomainError, ValidationError
from bellstat.nonequivalence import (
    TwoPointModel,
    construct,
    demo_row,
    empirical_check,
    linear_significance,
    moment_values,
    moments,
    ratio_significance,
    scale_ratio,
)

positive = st.floats(1e-3, 1e3)
models = st.builds(TwoPointModel, p1=st.floats(0.001, 0.999), a1=positive, a2=positive, eps1=positive, eps2=positive)


def brute_moments(m: TwoPointModel):
    """Moments by direct expectation over the two support points."""
    pts = [(m.p1, m.a1, m.eps1), (m.p2, m.a2, m.eps2)]
    j = [(p, a - (1 + e) * a) for p, a, e in pts]
    t = [(p, (1 + e) * a / a) for p, a, e in pts]
    out = []
    for vals in (j, t):
        mu = sum(p * v for p, v in vals)
        var = sum(p * (v - mu) ** 2 for p, v in vals)
        out += [mu, math.sqrt(var)]
    return out


class TestMoments:
    def test_symmetric_is_degenerate(self):
        m = TwoPointModel(0.5, 2.0, 2.0, 0.3, 0.3)
        mu_j, sigma_j, _, _ = moment_values(m)
        assert mu_j == pytest.approx(-0.6) and sigma_j == 0
        with pytest.raises(DegenerateError, match="R_J and R_T") as info:
            moments(m)
        assert info.value.moments[0] == pytest.approx(-0.6)

    @given(models)
    def test_signs(self, m):
        mu_j, _, mu_t, _ = moment_values(m)
        assert mu_j < 0 and mu_t > 1

    @given(models)
    def test_matches_direct_expectation(self, m):
        expected = brute_moments(m)
        got = moment_values(m)
        for g, e in zip(got, expected):
            assert g == pytest.approx(e, rel=1e-9, abs=1e-9)

    def test_footnote_ratio(self):
        m = TwoPointModel(0.01, 1.0, 1.0, 102.0, 1.0)
        r_t = moments(m).r_t
        expected = math.sqrt(0.01 / 0.99) + 1 / (math.sqrt(0.01 * 0.99) * 101)
        assert r_t == pytest.approx(expected, rel=1e-12)
        assert r_t == pytest.approx(0.2000, abs=1e-4)

    @given(models, st.floats(1e-2, 1e2))
    def test_scale_invariance(self, m, c):
        try:
            base = moments(m)
            moved = moments(m.scaled(c))
        except DegenerateError:
            return
        assert moved.mu_t == pytest.approx(base.mu_t, rel=1e-12)
        assert moved.sigma_t == pytest.approx(base.sigma_t, rel=1e-12)
        assert moved.r_t == pytest.approx(base.r_t, rel=1e-12)
        assert moved.r_j == pytest.approx(base.r_j, rel=1e-9)
        assert moved.mu_j == pytest.approx(c * base.mu_j, rel=1e-12)
        assert moved.sigma_j == pytest.approx(c * base.sigma_j, rel=1e-9)

    @given(st.floats(0.001, 0.999), st.floats(1.001, 1e4), positive, positive)
    def test_ratio_closed_form(self, p1, lam, eps2, a):
        m = TwoPointModel(p1, a, 1.0, lam * eps2, eps2)
        assert moments(m).r_t == pytest.approx(ratio_significance(p1, lam), rel=1e-9)

    def test_ratio_closed_form_symbolic(self):
        p1, p2, lam, eps2 = sp.symbols("p1 p2 lambda epsilon2", positive=True)
        eps1 = lam * eps2
        direct = (eps1 * p1 + eps2 * p2) / (sp.sqrt(p1 * p2) * (eps1 - eps2))
        closed = sp.sqrt(p1 / p2) + 1 / (sp.sqrt(p1 * p2) * (lam - 1))
        cleared = sp.expand(sp.simplify((direct - closed) * sp.sqrt(p1 * p2) * (lam - 1)))
        # what remains is a multiple of the constraint p1 + p2 = 1
        assert cleared != 0
        assert sp.simplify(cleared.subs(p2, 1 - p1)) == 0

    def test_invalid(self):
        with pytest.raises(ValidationError):
            TwoPointModel(1.0, 1, 1, 1, 1)
        with pytest.raises(ValidationError):
            TwoPointModel(0.5, 1, -1, 1, 1)


class TestConstruct:
    def test_footnote_instance(self):
        m = construct(0.1, 102, 69)
        a = m.a1 / m.a2
        assert a == pytest.approx(0.011225, abs=1e-6)
        assert round(a, 4) == 0.0112
        assert (m.p1, m.eps1, m.eps2) == (pytest.approx(0.01), 102.0, 1.0)

    def test_linear_significance(self):
        rep = moments(construct(0.1, 102, 69))
        p1, p2 = 0.01, 0.99
        exact = math.sqrt(p1 / p2) + 69 * 0.1 / math.sqrt(p1 * p2)
        assert rep.r_j == pytest.approx(exact, rel=1e-12)
        assert rep.r_j == pytest.approx(69.45, abs=0.01)
        assert linear_significance(0.1, 69) == pytest.approx(rep.r_j, rel=1e-12)
        # dropping the sqrt(p1/p2) term gives the rough R_J ~ k
        assert rep.r_j == pytest.approx(69, rel=0.02)

    @given(st.floats(0.01, 0.99), st.floats(1.01, 1e4), st.floats(0.1, 1e4))
    def test_scale_identity(self, delta, lam, k):
        a = scale_ratio(delta, lam, k)
        assert a * lam - 1 == pytest.approx(1 / (k * delta), rel=1e-9)

    def test_large_k_limit(self):
        r_js = [moments(construct(0.1, 102, k)).r_j for k in (1e2, 1e4, 1e6)]
        assert r_js[0] < r_js[1] < r_js[2]
        assert scale_ratio(0.1, 102, 1e12) == pytest.approx(1 / 102, rel=1e-9)

    @pytest.mark.parametrize("k", [10, 50, 100])
    def test_divergence(self, k):
        rep = moments(construct(0.1, 102, k))
        assert rep.r_j >= 0.9 * k
        assert rep.r_t <= 0.25

    @pytest.mark.parametrize("delta,k", [(0.1, 10), (0.05, 69), (0.01, 1000)])
    def test_rough_k_within_two_percent(self, delta, k):
        lam = 2 / delta**2
        assert moments(construct(delta, lam, k)).r_j == pytest.approx(k, rel=0.02)

    def test_domain(self):
        with pytest.raises(DomainError):
            construct(0.1, 1.0, 69)
        with pytest.raises(DomainError):
            construct(1.5, 102, 69)
        with pytest.raises(DomainError):
            construct(0.1, 102, 0)

    def test_demo_row(self):
        row = demo_row(0.1, 102, 10)
        assert row["r_j"] == pytest.approx(10.15, abs=0.01)
        assert row["r_t"] == pytest.approx(demo_row(0.1, 102, 69)["r_t"], rel=1e-12)


class TestEmpirical:
    def test_footnote_parameters(self):
        m = construct(0.1, 102, 69)
        exact = moments(m)
        emp = empirical_check(m, 1_000_000, seed=3)
        assert emp.r_t == pytest.approx(exact.r_t, rel=0.05)
        se_mu_j = exact.sigma_j / math.sqrt(1_000_000)
        assert abs(emp.mu_j - exact.mu_j) <= 5 * se_mu_j

    def test_deterministic(self):
        m = construct(0.1, 102, 69)
        assert empirical_check(m, 1000, seed=8) == empirical_check(m, 1000, seed=8)

    def test_constant_t(self):
        emp = empirical_check(TwoPointModel(0.3, 1.0, 2.0, 0.5, 0.5), 10_000, seed=1)
        assert emp.sigma_t == 0.0 and emp.r_t is None
        assert emp.r_j is not None

    def test_degenerate_sample(self):
        emp = empirical_check(TwoPointModel(1e-9, 1.0, 2.0, 0.5, 0.7), 100, seed=1)
        assert emp.degenerate and emp.r_j is None and emp.r_t is None

    def test_needs_two_samples(self):
        with pytest.raises(DomainError):
            empirical_check(construct(0.1, 102, 69), 1, seed=0)
