import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from givetake import (
    Constant,
    DomainError,
    ErgodicityError,
    Indicator,
    Linear,
    PiecewiseConstant,
    Polynomial,
    SearchForm,
    beta_density,
    density_cdf,
    stationary_density,
    stationary_density_general,
    stationary_density_piecewise,
    stationary_density_polynomial,
)
from givetake.analytic import density_grid, write_density_csv

LN2 = math.log(2.0)


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.abs(b)))


def local_maxima(y):
    return int(np.sum((y[1:-1] > y[:-2]) & (y[1:-1] > y[2:])))


class TestGeneralForm:
    @pytest.mark.parametrize("z", [1.0, 2.0, 5.0, 0.4])
    @pytest.mark.parametrize("inner", ["closed", "quad"])
    def test_identity_p_gives_symmetric_beta(self, z, inner, interior):
        d = stationary_density_general(Linear(1.0, 1.0), z, z, inner=inner)
        assert rel_err(d.pdf(interior), stats.beta(z, z).pdf(interior)) <= 1e-10

    def test_indicator_half_is_log_case(self, interior):
        d = stationary_density_general(Indicator(0.5), 1.0, 1.0)
        expected = np.where(interior < 0.5, 1 / (1 - interior), 1 / interior) / (2 * LN2)
        assert rel_err(d.pdf(interior), expected) <= 1e-10

    def test_constant_half_is_arcsine(self, interior):
        # the constant case gives beta(z(1 - p0), z p0); uniform needs p(x) = x instead
        d = stationary_density_general(Constant(0.5), 1.0, 1.0)
        assert rel_err(d.pdf(interior), stats.beta(0.5, 0.5).pdf(interior)) <= 1e-10

    def test_non_ergodic_rejected(self):
        with pytest.raises(ErgodicityError):
            stationary_density_general(Constant(1.0), 1.0, 1.0)

    @pytest.mark.parametrize("l, r", [(0.0, 1.0), (1.0, -2.0)])
    def test_parameter_domain(self, l, r):
        with pytest.raises(DomainError):
            stationary_density_general(Linear(1.0, 1.0), l, r)

    def test_endpoint_values(self):
        d = stationary_density_general(Constant(0.5), 1.0, 1.0)
        assert d.pdf(0.0) == math.inf and d.pdf(1.0) == math.inf
        d = stationary_density_general(Linear(1.0, 1.0), 1.0, 1.0)
        assert d.pdf(0.0) == pytest.approx(1.0) and d.pdf(1.0) == pytest.approx(1.0)
        d = stationary_density_general(Linear(1.0, 1.0), 2.0, 2.0)
        assert d.pdf(0.0) == 0.0

    def test_exponents_recorded(self):
        d = stationary_density_general(PiecewiseConstant((0, 0.5, 1), (0.25, 0.6)), 2.0, 3.0)
        assert d.exponents == pytest.approx((2.0 * 0.75 - 1.0, 3.0 * 0.6 - 1.0))


class TestPolynomialForm:
    @pytest.mark.parametrize("b, c, z", [(0.5, 1.0, 2.0), (0.8, 0.3, 4.0), (1.0, 1.0, 3.0)])
    def test_linear_gives_beta(self, b, c, z, interior):
        d = stationary_density_polynomial(Linear(b, c), z, z)
        assert d.form == "product-beta"
        assert rel_err(d.pdf(interior), stats.beta(b * z, c * z).pdf(interior)) <= 1e-10
        d = stationary_density_polynomial(Linear(b, c).as_polynomial(), z, z)
        assert rel_err(d.pdf(interior), stats.beta(b * z, c * z).pdf(interior)) <= 1e-10

    @pytest.mark.parametrize("p0, z", [(0.3, 2.0), (0.5, 1.0), (0.9, 5.0)])
    def test_constant_gives_beta(self, p0, z, interior):
        d = stationary_density_polynomial(Constant(p0), z, z)
        assert rel_err(d.pdf(interior), stats.beta(z * (1 - p0), z * p0).pdf(interior)) <= 1e-10

    @pytest.mark.parametrize(
        "p, l, r",
        [
            (Linear(1.0, 1.0), 1.0, 2.0),
            (Polynomial((0.1, 0.5, 0.3)), 2.0, 3.0),
            (Polynomial((0.5, -0.5, 0.9)), 1.5, 0.7),
            (Polynomial((0.2, 0.0, 0.0, 0.6)), 4.0, 4.0),
        ],
        ids=["identity-1-2", "quadratic", "signed-quadratic", "cubic"],
    )
    def test_agrees_with_general(self, p, l, r, interior):
        a = stationary_density_polynomial(p, l, r)
        g = stationary_density_general(p, l, r)
        q = stationary_density_general(p, l, r, inner="quad")
        assert rel_err(a.pdf(interior), g.pdf(interior)) <= 1e-10
        assert rel_err(q.pdf(interior), g.pdf(interior)) <= 1e-9

    def test_exponents(self):
        p = Polynomial((0.1, 0.5, 0.3))  # p0 = 0.1, q0 = p(1) = 0.9
        d = stationary_density_polynomial(p, 2.0, 3.0)
        assert d.exponents == pytest.approx((2.0 * 0.9 - 1.0, 3.0 * 0.9 - 1.0))

    def test_precondition(self):
        with pytest.raises(ErgodicityError):
            stationary_density_polynomial(Polynomial((1.0, -0.5)), 1.0, 1.0)


class TestPiecewiseForm:
    def test_log_case_constants(self):
        d = stationary_density_piecewise(PiecewiseConstant((0, 0.5, 1), (0.0, 1.0)), 1.0)
        assert d.constants[0] == pytest.approx(1 / (2 * LN2), rel=1e-12)
        assert d.constants[1] == pytest.approx(1 / (2 * LN2), rel=1e-12)

    def test_single_piece(self):
        d = stationary_density_piecewise(PiecewiseConstant((0.0, 1.0), (0.3,)), 2.0)
        from givetake.special import beta_fn

        assert d.constants[0] == pytest.approx(1 / beta_fn(1.4, 0.6), rel=1e-12)

    def test_peaked_z2(self):
        # pieces x/(1-x) and (1-x)/x; mass 2C(ln 2 - 1/2) = 1
        d = stationary_density_piecewise(PiecewiseConstant((0, 0.5, 1), (0.0, 1.0)), 2.0)
        c = 1.0 / (2.0 * LN2 - 1.0)
        assert d.constants == pytest.approx((c, c), rel=1e-12)
        x = np.array([0.1, 0.3, 0.7, 0.9])
        assert d.pdf(x) == pytest.approx(c * np.where(x < 0.5, x / (1 - x), (1 - x) / x), rel=1e-12)

    def test_indicator_and_search_dispatch(self, interior):
        a = stationary_density(Indicator(0.3), 2.0)
        b = stationary_density_piecewise(PiecewiseConstant((0, 0.3, 1), (0.0, 1.0)), 2.0)
        assert a.form == "piecewise-beta"
        assert rel_err(a.pdf(interior), b.pdf(interior)) <= 1e-14
        c = stationary_density(SearchForm(0.0, 0.3), 2.0)
        assert rel_err(c.pdf(interior), b.pdf(interior)) <= 1e-14

    @pytest.mark.parametrize(
        "bps, levels, z",
        [
            ((0, 0.5, 1), (0.0, 1.0), 1.0),
            ((0, 0.3, 1), (0.7, 0.3), 10.0),
            ((0, 1 / 6, 1 / 3, 0.5, 2 / 3, 5 / 6, 1), (0, 1, 0, 1, 0, 1), 3.0),
            ((0, 1 / 6, 1 / 3, 0.5, 2 / 3, 5 / 6, 1), (0.2, 1, 0.2, 1, 0.2, 1), 3.0),
        ],
    )
    def test_agrees_with_general_and_is_continuous(self, bps, levels, z, interior):
        p = PiecewiseConstant(bps, levels)
        d = stationary_density_piecewise(p, z)
        g = stationary_density_general(p, z, z)
        assert rel_err(d.pdf(interior), g.pdf(interior)) <= 1e-9
        for j in range(1, p.k):
            left, right = d.limits_at(j)
            assert abs(left - right) / right <= 1e-10
        assert d.integrate() == pytest.approx(1.0, abs=1e-10)

    @given(
        st.lists(st.floats(0.0, 1.0), min_size=2, max_size=5),
        st.floats(0.3, 8.0),
    )
    @settings(max_examples=40, deadline=None)
    def test_random_piecewise_invariants(self, levels, z):
        levels[0] = min(levels[0], 0.95)
        levels[-1] = max(levels[-1], 0.05)
        k = len(levels)
        p = PiecewiseConstant(tuple(np.linspace(0, 1, k + 1)), tuple(levels))
        d = stationary_density_piecewise(p, z)
        assert d.integrate() == pytest.approx(1.0, abs=1e-8)
        assert float(density_cdf(d, 1.0)) == pytest.approx(1.0, abs=1e-8)
        for j in range(1, k):
            left, right = d.limits_at(j)
            assert abs(left - right) <= 1e-10 * max(right, 1e-300)
        assert d.exponents[0] > -1.0 and d.exponents[1] > -1.0

    def test_precondition(self):
        with pytest.raises(ErgodicityError):
            stationary_density_piecewise(PiecewiseConstant((0, 0.5, 1), (1.0, 0.5)), 2.0)

    @pytest.mark.parametrize("s1", [0.3, 0.5, 0.75])
    @pytest.mark.parametrize("z", [1.5, 2.0, 5.0, 10.0])
    def test_peak_at_breakpoint(self, s1, z):
        d = stationary_density_piecewise(PiecewiseConstant((0, s1, 1), (0.0, 1.0)), z)
        x = np.linspace(0.0, 1.0, 10_001)
        assert abs(x[np.argmax(d.pdf(x))] - s1) <= 1e-4 + 1e-12

    def test_trimodal(self):
        s = (0, 1 / 6, 1 / 3, 0.5, 2 / 3, 5 / 6, 1)
        d = stationary_density_piecewise(PiecewiseConstant(s, (0, 1, 0, 1, 0, 1)), 3.0)
        x, y = density_grid(d, 2001)
        assert local_maxima(y) == 3

    def test_bimodal(self):
        d = stationary_density_piecewise(PiecewiseConstant((0, 0.5, 1), (0.7, 0.3)), 10.0)
        x, y = density_grid(d, 2001)
        assert local_maxima(y) == 2


class TestDensityInvariants:
    CASES = [
        (Linear(1.0, 1.0), 2.0, 2.0),
        (Constant(0.5), 1.0, 1.0),
        (Polynomial((0.1, 0.5, 0.3)), 2.0, 3.0),
        (PiecewiseConstant((0, 0.4, 1), (0.2, 0.9)), 0.7, 0.7),
        (PiecewiseConstant((0, 0.4, 1), (0.2, 0.9)), 0.7, 2.0),
        (Indicator(0.5), 1.0, 1.0),
    ]

    @pytest.mark.parametrize("p, l, r", CASES, ids=lambda v: repr(v) if not isinstance(v, float) else str(v))
    def test_unit_mass_and_nonnegative(self, p, l, r, interior):
        d = stationary_density(p, l, r)
        assert d.integrate() == pytest.approx(1.0, abs=1e-8)
        assert np.all(d.pdf(interior) >= 0.0)

    @pytest.mark.parametrize("p, l, r", CASES, ids=lambda v: repr(v) if not isinstance(v, float) else str(v))
    def test_cdf_against_quadrature(self, p, l, r):
        d = stationary_density(p, l, r)
        xs = np.array([0.0, 0.1, 0.37, 0.5, 0.81, 1.0])
        cdf = density_cdf(d, xs)
        assert cdf[0] == 0.0 and cdf[-1] == pytest.approx(1.0, abs=1e-8)
        for x, c in zip(xs[1:-1], cdf[1:-1]):
            assert c == pytest.approx(d.integrate(0.0, x), abs=1e-9)
        assert np.all(np.diff(density_cdf(d, np.linspace(0, 1, 5000))) >= -1e-12)

    def test_cdf_examples(self):
        assert float(density_cdf(beta_density(1, 1), 0.3)) == pytest.approx(0.3, abs=1e-14)
        d = stationary_density_piecewise(PiecewiseConstant((0, 0.5, 1), (0.0, 1.0)), 1.0)
        assert float(density_cdf(d, 0.5)) == pytest.approx(0.5, abs=1e-12)

    def test_cdf_domain(self):
        with pytest.raises(DomainError):
            density_cdf(beta_density(2, 2), 1.5)

    def test_csv_export(self, tmp_path):
        d = beta_density(2, 2)
        path = write_density_csv(d, tmp_path / "d.csv", n=9)
        rows = path.read_text().splitlines()
        assert rows[0] == "x,pi"
        x, v = np.array([[float(t) for t in row.split(",")] for row in rows[1:]]).T
        assert np.allclose(x, np.arange(1, 10) / 10.0)
        assert np.allclose(v, 6 * x * (1 - x), rtol=1e-14)

    def test_metadata(self):
        d = stationary_density(PiecewiseConstant((0, 0.5, 1), (0.0, 1.0)), 2.0)
        meta = d.metadata()
        assert meta["form"] == "piecewise-beta"
        assert meta["constants"] == pytest.approx([1.0 / (2.0 * LN2 - 1.0)] * 2)
