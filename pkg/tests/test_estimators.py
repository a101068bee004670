import math

import numpy as np
import pytest
from scipy import stats
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from givetake import BetaIntFirst, DomainError, Indicator, Linear, StationaryDensity


class TestStationaryDensity:
    def test_params_roundtrip(self):
        est = StationaryDensity(direction=Indicator(0.3), left=2.0, right=4.0)
        params = est.get_params()
        assert params == {"direction": Indicator(0.3), "left": 2.0, "right": 4.0, "method": "analytic"}
        twin = clone(est)
        assert twin.get_params() == params and not hasattr(twin, "density_")

    def test_set_params(self):
        est = StationaryDensity().set_params(left=3.0)
        assert est.left == 3.0

    def test_default_is_beta(self):
        x = np.linspace(0.05, 0.95, 7).reshape(-1, 1)
        est = StationaryDensity(left=2.0).fit()
        assert est.pdf(x) == pytest.approx(stats.beta(2, 2).pdf(x.ravel()), rel=1e-10)
        assert est.score_samples(x) == pytest.approx(stats.beta(2, 2).logpdf(x.ravel()), rel=1e-10)

    def test_score_is_mean_log_density(self):
        x = np.array([[0.2], [0.5], [0.9]])
        est = StationaryDensity(left=3.0).fit(x)
        assert est.score(x) == pytest.approx(float(np.mean(stats.beta(3, 3).logpdf(x.ravel()))), rel=1e-10)

    def test_transform_is_cdf(self):
        est = StationaryDensity(left=2.0).fit()
        x = np.array([0.1, 0.5, 0.8])
        assert est.transform(x).ravel() == pytest.approx(stats.beta(2, 2).cdf(x), abs=1e-10)
        assert est.fit_transform(x.reshape(-1, 1)).shape == (3, 1)

    def test_bvp_method(self):
        est = StationaryDensity(left=BetaIntFirst(1, 2), right=BetaIntFirst(1, 2), method="bvp").fit()
        x = np.linspace(0.05, 0.95, 5)
        assert est.pdf(x) == pytest.approx(stats.beta(2, 2).pdf(x), abs=1e-6)
        assert est.transform([0.5]).item() == pytest.approx(0.5, abs=1e-7)

    def test_analytic_needs_beta_one(self):
        with pytest.raises(DomainError):
            StationaryDensity(left=BetaIntFirst(2, 2)).fit()

    def test_unknown_method(self):
        with pytest.raises(DomainError):
            StationaryDensity(method="magic").fit()

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            StationaryDensity().pdf([0.5])

    @pytest.mark.parametrize("bad", [[[0.1, 0.2]], [1.5], [-0.1]])
    def test_bad_input(self, bad):
        est = StationaryDensity().fit()
        with pytest.raises(DomainError):
            est.pdf(bad)

    def test_sample_follows_stationary_law(self):
        est = StationaryDensity(direction=Linear(1.0, 1.0), left=2.0).fit()
        draws = est.sample(200_000, random_state=4)
        assert draws.shape == (200_000, 1)
        assert stats.kstest(draws.ravel(), stats.beta(2, 2).cdf).statistic <= 0.01

    def test_indicator_log_density(self):
        est = StationaryDensity(direction=Indicator(0.5), left=1.0).fit()
        assert est.score_samples([[0.25]])[0] == pytest.approx(-math.log(0.75 * 2 * math.log(2.0)), rel=1e-10)
