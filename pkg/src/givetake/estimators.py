"""scikit-learn style wrapper around the stationary-density machinery.

>>> from givetake import Linear, StationaryDensity
>>> est = StationaryDensity(direction=Linear(1.0, 1.0), left=2.0).fit()
>>> round(float(est.score_samples([[0.5]])[0]), 6)
0.405465
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .analytic import density_cdf, stationary_density
from .chain import simulate
from .core import BetaIntFirst, BetaOneZ, ChainSpec, Linear
from .exceptions import DomainError

__all__ = ["StationaryDensity"]


def _as_law(v):
    if isinstance(v, (int, float, np.integer, np.floating)):
        return BetaOneZ(float(v))
    return v


class StationaryDensity(TransformerMixin, BaseEstimator):
    """Stationary law of a give-and-take chain as a fitted density model.

    Parameters
    ----------
    direction : direction function, default p(x) = x
    left, right : float or proportion law
        A number z means beta(1, z) proportions; ``right=None`` copies ``left``.
    method : {"analytic", "bvp"}
        Closed form (beta(1, z) laws) or the boundary-value solver, which also
        handles integer-first-parameter beta laws and mixtures.

    ``fit`` ignores its data: the model is fully determined by the chain.
    ``transform`` maps states to stationary CDF values, so a stationary
    sample is sent to a uniform one.
    """

    def __init__(self, direction=None, left=1.0, right=None, method="analytic"):
        self.direction = direction
        self.left = left
        self.right = right
        self.method = method

    def _spec(self):
        p = self.direction if self.direction is not None else Linear(1.0, 1.0)
        left = _as_law(self.left)
        right = _as_law(self.right) if self.right is not None else left
        return ChainSpec(p, left, right)

    def fit(self, X=None, y=None):
        spec = self._spec()
        if self.method == "analytic":
            left, right = spec.left, spec.right
            for law in (left, right):
                if not isinstance(law, BetaOneZ) and not (isinstance(law, BetaIntFirst) and law.a == 1):
                    raise DomainError("the analytic method needs beta(1, z) proportions; use method='bvp'")
            zl = left.z if isinstance(left, BetaOneZ) else left.b
            zr = right.z if isinstance(right, BetaOneZ) else right.b
            self.density_ = stationary_density(spec.p, zl, zr)
        elif self.method == "bvp":
            from .semidegenerate import factorize_beta_kernel, factorize_mixture_kernel, solve_bvp
            from .core import Mixture

            if isinstance(spec.left, Mixture) or isinstance(spec.right, Mixture) or isinstance(spec.left, BetaOneZ):
                k = factorize_mixture_kernel(spec.p, spec.left, spec.right)
            else:
                k = factorize_beta_kernel(spec.p, spec.left, spec.right)
            self.density_ = solve_bvp(k)
        else:
            raise DomainError(f"unknown method {self.method!r}")
        self.spec_ = spec
        return self

    def _points(self, X):
        X = check_array(X, ensure_2d=False, dtype=float)
        x = X.reshape(-1) if X.ndim == 1 or X.shape[1] == 1 else None
        if x is None:
            raise DomainError(f"expected a single feature, got shape {X.shape}")
        if np.any((x < 0.0) | (x > 1.0)):
            raise DomainError("states must lie in [0, 1]")
        return x

    def pdf(self, X):
        check_is_fitted(self, "density_")
        return np.asarray(self.density_.pdf(self._points(X)), dtype=float)

    def score_samples(self, X):
        """Log stationary density at each state."""
        with np.errstate(divide="ignore"):
            return np.log(self.pdf(X))

    def score(self, X, y=None):
        """Mean log-likelihood of the states under the stationary law."""
        return float(np.mean(self.score_samples(X)))

    def transform(self, X):
        check_is_fitted(self, "density_")
        x = self._points(X)
        if hasattr(self.density_, "form"):
            u = density_cdf(self.density_, x)
        else:
            u = np.array([self.density_.integrate(0.0, float(t)) for t in x])
        return np.asarray(u, dtype=float).reshape(-1, 1)

    def sample(self, n_samples=1, random_state=0, burn_in=10_000):
        """States of one simulated trajectory after ``burn_in`` steps (correlated draws)."""
        check_is_fitted(self, "density_")
        traj = simulate(self.spec_, burn_in + n_samples, int(random_state))
        return traj.states[burn_in + 1 :].reshape(-1, 1)
