"""Independent checks that a candidate density is stationary for a chain.

* :func:`residual_IE` plugs the density into the stationarity integral
  equation by adaptive quadrature;
* :func:`kernel_oracle` discretizes the transition kernel on a cell grid and
  finds the stationary vector by power iteration;
* :func:`mc_fit` compares a long simulated trajectory with the density.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate, stats

from ._validation import check_nonneg_int
from .analytic import density_cdf, segment_integral
from .chain import simulate
from .core import ChainSpec
from .exceptions import DomainError, NumericalError

__all__ = [
    "transition_density",
    "residual_IE",
    "ie_rhs",
    "KernelGrid",
    "kernel_oracle",
    "FitReport",
    "mc_fit",
    "cell_averages",
]


def transition_density(spec: ChainSpec, x, y):
    """Density f(x, y) of the next state y given the current state x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    px = spec.p(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        right = (1.0 - px) / (1.0 - x) * spec.right.pdf((y - x) / (1.0 - x))
        left = px / x * spec.left.pdf((x - y) / x)
    out = np.where(x < y, right, np.where(y < x, left, 0.0))
    return np.where(np.isfinite(out), out, 0.0)


def _density_exponents(d):
    return getattr(d, "exponents", (0.0, 0.0))


def _quad_rtol(d):
    # numerically solved densities carry their own accuracy; asking quadrature
    # for more than that only trips roundoff detection
    return getattr(d, "quadrature_rtol", 1e-11)


def ie_rhs(d, spec: ChainSpec, y):
    """int_0^1 pi(x) f(x, y) dx at a single interior ``y``."""
    cuts = sorted({c for c in spec.p.discontinuities if 0.0 < c < 1.0} | set(getattr(d, "breakpoints", ())) | {y})
    knots = [0.0] + cuts + [1.0]
    e0, e1 = _density_exponents(d)
    pdf = d.pdf
    p = spec.p
    right_pdf, left_pdf = spec.right.pdf, spec.left.pdf

    def integrand(x):
        if x < y:
            k = (1.0 - float(p(x))) / (1.0 - x) * float(right_pdf((y - x) / (1.0 - x)))
        elif x > y:
            k = float(p(x)) / x * float(left_pdf((x - y) / x))
        else:
            return 0.0
        if k == 0.0:
            return 0.0
        return k * float(pdf(x))

    total = 0.0
    for a, b in zip(knots[:-1], knots[1:]):
        total += segment_integral(
            integrand,
            a,
            b,
            e0 if a == 0.0 else 0.0,
            e1 if b == 1.0 else 0.0,
            epsabs=1e-13,
            epsrel=_quad_rtol(d),
            limit=200,
        )
    return total


def residual_IE(d, spec: ChainSpec, n_grid=501, return_profile=False):
    """sup_y |pi(y) - int pi(x) f(x, y) dx| / max(pi(y), 1) over an interior grid.

    ``d`` is anything with ``pdf`` (and optionally ``exponents`` and
    ``breakpoints``), so BVP solutions can be checked the same way as
    closed-form densities.
    """
    ys = np.arange(1, n_grid + 1) / (n_grid + 1.0)
    lhs = np.asarray(d.pdf(ys), dtype=float)
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            rhs = np.array([ie_rhs(d, spec, float(y)) for y in ys])
        except integrate.IntegrationWarning as exc:
            raise NumericalError(f"quadrature failure in integral-equation residual: {exc}") from exc
    rel = np.abs(lhs - rhs) / np.maximum(lhs, 1.0)
    res = float(np.max(rel))
    if return_profile:
        return res, ys, lhs, rhs
    return res


# ---------------------------------------------------------------------------
# Kernel discretization oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KernelGrid:
    n: int
    midpoints: np.ndarray
    matrix: np.ndarray
    stationary: np.ndarray
    iterations: int
    final_distance: float

    @property
    def edges(self):
        return np.linspace(0.0, 1.0, self.n + 1)

    @property
    def cell_density(self):
        """Stationary probabilities divided by the cell width."""
        return self.stationary * self.n

    def row_sum_error(self):
        return float(np.max(np.abs(self.matrix.sum(axis=1) - 1.0)))


def _transition_matrix(spec: ChainSpec, n):
    edges = np.linspace(0.0, 1.0, n + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    px = spec.p(mids)[:, None]
    x = mids[:, None]
    e = edges[None, :]
    w_right = np.clip((e - x) / (1.0 - x), 0.0, 1.0)
    w_left = np.clip((x - e) / x, 0.0, 1.0)
    f_right = spec.right.cdf(w_right.ravel()).reshape(w_right.shape)
    f_left = spec.left.cdf(w_left.ravel()).reshape(w_left.shape)
    mat = (1.0 - px) * np.diff(f_right, axis=1) - px * np.diff(f_left, axis=1)
    return mids, np.maximum(mat, 0.0)


def kernel_oracle(spec: ChainSpec, n_cells=2000, tol=1e-12, max_iter=100_000) -> KernelGrid:
    """Stationary vector of the cell-discretized kernel by power iteration.

    Entry (i, j) is the exact probability of landing in cell j from the
    midpoint of cell i; iteration starts from the uniform vector and stops when
    successive iterates differ by less than ``tol`` in L1.
    """
    n_cells = check_nonneg_int(n_cells, "n_cells")
    if n_cells < 100:
        raise DomainError(f"n_cells must be at least 100, got {n_cells}")
    mids, mat = _transition_matrix(spec, n_cells)
    v = np.full(n_cells, 1.0 / n_cells)
    dist = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        nxt = v @ mat
        nxt /= nxt.sum()
        dist = float(np.abs(nxt - v).sum())
        v = nxt
        if dist < tol:
            break
    else:
        raise NumericalError(f"power iteration did not converge: final L1 distance {dist:.3e}")
    return KernelGrid(n_cells, mids, mat, v, it, dist)


def cell_averages(d, n_cells):
    """Average of a density over each of ``n_cells`` equal cells."""
    edges = np.linspace(0.0, 1.0, n_cells + 1)
    if hasattr(d, "form") and d.form in ("product-beta", "piecewise-beta"):
        return np.diff(density_cdf(d, edges)) * n_cells
    if hasattr(d, "cell_averages"):
        return d.cell_averages(edges)
    return np.array([d.integrate(a, b) for a, b in zip(edges[:-1], edges[1:])]) * n_cells


# ---------------------------------------------------------------------------
# Monte Carlo goodness of fit
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FitReport:
    ks: float
    tv: float
    sample_size: int
    burn_in: int
    passed: bool
    ks_max: float
    tv_max: float
    seed: int

    def to_json(self, **kw):
        return json.dumps(asdict(self), **kw)


def mc_fit(
    spec: ChainSpec,
    d,
    n_steps=1_000_000,
    burn_in=10_000,
    seed=0,
    ks_max=0.01,
    tv_max=0.02,
    bins=200,
    min_samples=1000,
) -> FitReport:
    """Kolmogorov-Smirnov and binned total-variation distance of a trajectory to ``d``.

    The states after the first ``burn_in`` transitions are kept.  Runs
    with fewer than ``min_samples`` retained states fail automatically.
    """
    n_steps = check_nonneg_int(n_steps, "n_steps")
    burn_in = check_nonneg_int(burn_in, "burn_in")
    if n_steps <= burn_in:
        raise DomainError(f"n_steps ({n_steps}) must exceed burn_in ({burn_in})")
    traj = simulate(spec, n_steps, seed)
    sample = traj.states[burn_in + 1 :]
    n = sample.size
    ks = float(stats.kstest(sample, lambda v: density_cdf(d, np.clip(v, 0.0, 1.0))).statistic)
    edges = np.linspace(0.0, 1.0, bins + 1)
    counts, _ = np.histogram(sample, bins=edges)
    probs = np.diff(density_cdf(d, edges))
    tv = float(0.5 * np.abs(counts / n - probs).sum())
    ks, tv = min(max(ks, 0.0), 1.0), min(max(tv, 0.0), 1.0)
    passed = bool(n >= min_samples and ks <= ks_max and tv <= tv_max)
    return FitReport(ks, tv, int(n), burn_in, passed, ks_max, tv_max, int(seed))
