"""Semidegenerate transition kernels and the boundary-value route to stationarity.

When the transition density separates as

    f(x, y) = sum_i a_i(y) b_i(x)   (x < y),
    f(x, y) = sum_j c_j(y) d_j(x)   (y <= x),

a stationary density u is ``u = sum_i a_i alpha_i + sum_j c_j beta_j`` where

    alpha_i' = b_i u,  alpha_i(0+) = 0,
    beta_j'  = -d_j u, beta_j(1-)  = 0.

:func:`solve_bvp` shoots the M-dimensional family of solutions satisfying the
left conditions across (0, 1) and picks the member meeting the right
conditions through an SVD null vector.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, optimize

from .core import BetaIntFirst, BetaOneZ, ChainSpec, Mixture, canonicalize, check_E1
from .exceptions import DomainError, ErgodicityError, NumericalError, UnsupportedError
from .special import beta_fn

__all__ = [
    "KernelFactorization",
    "BvpSolution",
    "factorize_beta_kernel",
    "factorize_mixture_kernel",
    "solve_bvp",
    "endpoint_exponent",
]

ENDPOINT_OFFSET = 1e-6
LOW_CONFIDENCE_EXPONENT = -0.95


def endpoint_exponent(p_toward, law) -> float:
    """Power of the stationary density at an endpoint.

    ``p_toward`` is the probability of jumping towards that endpoint from its
    vicinity and ``law`` the proportion law of such jumps.  The exponent is
    the root e in (-1, s) of ``p_toward * E[(1 - W)^(-e-1)] = 1``, where s is
    the power with which jumps from the bulk deposit mass next to the endpoint;
    without jumps towards the endpoint the exponent is s itself.
    """
    law = canonicalize(law)
    if isinstance(law, BetaIntFirst):
        source = law.b - 1.0
    else:
        source = float(min(l for mu, l in law.terms if mu != 0.0)) - 1.0
    if p_toward <= 0.0:
        return source
    g = lambda e: p_toward * law.complement_moment(-e - 1.0) - 1.0  # noqa: E731
    hi = source - 1e-12
    while not math.isfinite(g(hi)) or g(hi) <= 0.0:
        hi = 0.5 * (hi + source)
        if source - hi < 1e-300:
            return source
    return float(optimize.brentq(g, -1.0, hi, xtol=1e-14, rtol=1e-14))


@dataclass(frozen=True, eq=False)
class KernelFactorization:
    """Factors of a semidegenerate kernel plus the chain they came from."""

    a: Tuple[Callable, ...]
    b: Tuple[Callable, ...]
    c: Tuple[Callable, ...]
    d: Tuple[Callable, ...]
    S: Tuple[float, ...]
    spec: ChainSpec
    exponents: Tuple[float, float]
    kind: str = "beta"

    @property
    def N(self):
        return len(self.a)

    @property
    def M(self):
        return len(self.c)

    def kernel(self, x, y):
        """Reconstructed f(x, y) from the factors."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            upper = sum(ai(y) * bi(x) for ai, bi in zip(self.a, self.b))
            lower = sum(cj(y) * dj(x) for cj, dj in zip(self.c, self.d))
        return np.where(x < y, upper, lower)

    def reconstruction_error(self, n=200):
        """Max relative gap to the direct kernel on an n x n off-diagonal grid."""
        from .verify import transition_density

        g = (np.arange(n) + 0.5) / n
        x, y = np.meshgrid(g, g * (1 - 1e-3) + 0.5e-3 / n, indexing="ij")
        mask = x != y
        direct = transition_density(self.spec, x[mask], y[mask])
        recon = self.kernel(x[mask], y[mask])
        return float(np.max(np.abs(recon - direct) / np.maximum(np.abs(direct), 1e-300 + np.abs(direct).max() * 1e-12)))

    def row_mass(self, x):
        """int_0^1 f(x, y) dy from the factors (should be 1)."""
        f = lambda y: float(self.kernel(x, y))  # noqa: E731
        pts = sorted({x} | set(self.S))
        knots = [0.0] + [t for t in pts if 0.0 < t < 1.0] + [1.0]
        return sum(integrate.quad(f, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200)[0] for lo, hi in zip(knots[:-1], knots[1:]))


def _check_e1(p):
    report = check_E1(p)
    if not report.satisfied:
        raise ErgodicityError(report.explanation)


def _exponents(p, left, right):
    return (
        endpoint_exponent(p.limit_at_zero, left),
        endpoint_exponent(1.0 - p.limit_at_one, right),
    )


def factorize_beta_kernel(p, left, right) -> KernelFactorization:
    """Factors for beta(l1, l2) left / beta(r1, r2) right proportions, l1, r1 integers.

    The binomial expansions of (y - x)^(r1-1) and (x - y)^(l1-1) give
    N = r1 right terms and M = l1 left terms; the beta-function constants
    sit in ``a`` and ``c`` so that l1 = r1 = 1 reproduces
    a(y) = r (1-y)^(r-1), b(x) = (1 - p(x))/(1-x)^r, c(y) = l y^(l-1), d(x) = p(x)/x^l.
    """
    left, right = canonicalize(left), canonicalize(right)
    if not (isinstance(left, BetaIntFirst) and isinstance(right, BetaIntFirst)):
        raise UnsupportedError("factorize_beta_kernel needs beta laws with integer first parameter")
    _check_e1(p)
    l1, l2, r1, r2 = left.a, left.b, right.a, right.b
    inv_br, inv_bl = 1.0 / beta_fn(r1, r2), 1.0 / beta_fn(l1, l2)

    def make_a(i):
        return lambda y: inv_br * np.asarray(y, float) ** i * (1.0 - np.asarray(y, float)) ** (r2 - 1.0)

    def make_b(i):
        coef = math.comb(r1 - 1, i) * (-1.0) ** (r1 - 1 - i)
        power = r1 - 1 - i

        def b(x):
            x = np.asarray(x, float)
            return coef * x**power * (1.0 - p(x)) / (1.0 - x) ** (r1 + r2 - 1.0)

        return b

    def make_c(j):
        return lambda y: inv_bl * np.asarray(y, float) ** (j + l2 - 1.0)

    def make_d(j):
        coef = math.comb(l1 - 1, j) * (-1.0) ** j
        power = l1 - 1 - j

        def d(x):
            x = np.asarray(x, float)
            return coef * x**power * p(x) / x ** (l1 + l2 - 1.0)

        return d

    spec = ChainSpec(p, left, right)
    return KernelFactorization(
        tuple(make_a(i) for i in range(r1)),
        tuple(make_b(i) for i in range(r1)),
        tuple(make_c(j) for j in range(l1)),
        tuple(make_d(j) for j in range(l1)),
        tuple(sorted(set(p.discontinuities))),
        spec,
        _exponents(p, left, right),
        "beta",
    )


def _as_mixture(law):
    if isinstance(law, Mixture):
        return law
    law = canonicalize(law)
    if isinstance(law, BetaIntFirst) and law.a == 1:
        return Mixture(((law.b, law.b),))
    raise UnsupportedError(f"{law!r} is not a mixture of beta(1, z) densities")


def factorize_mixture_kernel(p, left, right) -> KernelFactorization:
    """Factors for left density sum mu_j (1-w)^(l_j-1) and right sum lambda_i (1-w)^(r_i-1).

    a_i(y) = lambda_i (1-y)^(r_i-1), b_i(x) = (1 - p(x)) / (1-x)^r_i,
    c_j(y) = mu_j y^(l_j-1),         d_j(x) = p(x) / x^l_j.
    """
    left, right = _as_mixture(left), _as_mixture(right)
    _check_e1(p)

    def make_a(lam, r):
        return lambda y: lam * (1.0 - np.asarray(y, float)) ** (r - 1.0)

    def make_b(r):
        return lambda x: (1.0 - p(np.asarray(x, float))) / (1.0 - np.asarray(x, float)) ** r

    def make_c(mu, l):
        return lambda y: mu * np.asarray(y, float) ** (l - 1.0)

    def make_d(l):
        return lambda x: p(np.asarray(x, float)) / np.asarray(x, float) ** l

    spec = ChainSpec(p, left, right)
    return KernelFactorization(
        tuple(make_a(lam, r) for lam, r in right.terms),
        tuple(make_b(r) for _, r in right.terms),
        tuple(make_c(mu, l) for mu, l in left.terms),
        tuple(make_d(l) for _, l in left.terms),
        tuple(sorted(set(p.discontinuities))),
        spec,
        _exponents(p, left, right),
        "mixture",
    )


# ---------------------------------------------------------------------------
# Boundary-value solver
# ---------------------------------------------------------------------------


def _vec(funcs, y):
    return np.array([float(f(y)) for f in funcs])


def _local_power(f, t, h, reflect=False):
    """Log-slope of |f| at the endpoint scale ``h`` (in t or in 1 - t)."""
    if reflect:
        v1, v2 = abs(float(f(1.0 - h))), abs(float(f(1.0 - 2.0 * h)))
    else:
        v1, v2 = abs(float(f(h))), abs(float(f(2.0 * h)))
    if v1 == 0.0 or v2 == 0.0:
        return 0.0
    return math.log(v2 / v1) / math.log(2.0)


@dataclass(frozen=True, eq=False)
class BvpSolution:
    """Stationary density from the boundary-value problem, with diagnostics.

    ``y`` holds the output grid, ``alpha`` (N x n) and ``beta`` (M x n) the
    auxiliary functions and ``u`` the normalized density on the grid.
    """

    y: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    u: np.ndarray
    singular_values: Tuple[float, ...]
    null_ratio: float
    exponents: Tuple[float, float]
    fitted_exponents: Tuple[float, float]
    breakpoints: Tuple[float, ...]
    factorization: KernelFactorization = field(repr=False)
    _pieces: list = field(repr=False, default_factory=list)
    _weights: np.ndarray = field(repr=False, default=None)
    _scale: float = 1.0
    _tails: Tuple[float, float] = (0.0, 0.0)

    quadrature_rtol = 1e-8

    @property
    def low_confidence(self):
        return min(self.fitted_exponents) < LOW_CONFIDENCE_EXPONENT

    @property
    def eps(self):
        return float(self.y[0])

    def _state(self, t):
        """Combined (alpha, beta, mass) at interior point t in [eps, 1 - eps]."""
        for lo, hi, sols in self._pieces:
            if lo <= t <= hi:
                z = sum(w * sol(t) for w, sol in zip(self._weights, sols))
                return z * self._scale
        raise DomainError(f"{t} outside the integration range")

    def _u_at(self, t, z):
        k = self.factorization
        n = k.N
        return float(_vec(k.a, t) @ z[:n] + _vec(k.c, t) @ z[n : n + k.M])

    def pdf(self, x):
        """Density at arbitrary points, power-law continued inside the endpoint offsets."""
        x_arr = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x_arr).ravel()
        out = np.empty_like(flat)
        eps = self.eps
        e0, e1 = self.exponents
        for idx, t in enumerate(flat):
            if t < eps:
                out[idx] = self.u[0] * (t / eps) ** e0 if t > 0 else (math.inf if e0 < 0 else (self.u[0] if e0 == 0 else 0.0))
            elif t > 1.0 - eps:
                s = 1.0 - t
                out[idx] = self.u[-1] * (s / eps) ** e1 if s > 0 else (math.inf if e1 < 0 else (self.u[-1] if e1 == 0 else 0.0))
            else:
                out[idx] = self._u_at(t, self._state(t))
        out = out.reshape(x_arr.shape)
        return float(out) if out.ndim == 0 else out

    __call__ = pdf

    def alpha_beta(self, t):
        z = self._state(t)
        n, m = self.factorization.N, self.factorization.M
        return z[:n], z[n : n + m]

    def mass_between(self, lo, hi):
        """int_lo^hi u from the integrated mass component."""
        return self._cum(hi) - self._cum(lo)

    def _cum(self, t):
        eps = self.eps
        left_tail, right_tail = self._tails
        e0, e1 = self.exponents
        k = self.factorization
        if t <= eps:
            return left_tail * (t / eps) ** (e0 + 1.0) if t > 0 else 0.0
        if t >= 1.0 - eps:
            s = 1.0 - t
            return 1.0 - right_tail * (s / eps) ** (e1 + 1.0)
        return float(self._state(t)[k.N + k.M])

    def cell_averages(self, edges):
        cum = np.array([self._cum(float(e)) for e in edges])
        return np.diff(cum) / np.diff(edges)

    def integrate(self, lo=0.0, hi=1.0):
        return self.mass_between(lo, hi)

    def diagnostics(self):
        return {
            "N": self.factorization.N,
            "M": self.factorization.M,
            "singular_values": list(self.singular_values),
            "null_ratio": self.null_ratio,
            "exponents": list(self.exponents),
            "fitted_exponents": list(self.fitted_exponents),
            "low_confidence": self.low_confidence,
            "min_u": float(self.u.min()),
            "endpoint_offset": self.eps,
            "alpha_at_left": [float(v) for v in self.alpha[:, 0]],
            "beta_at_right": [float(v) for v in self.beta[:, -1]],
        }

    def to_csv(self, path):
        path = Path(path)
        n, m = self.alpha.shape[0], self.beta.shape[0]
        header = ["y", "u"] + [f"alpha_{i + 1}" for i in range(n)] + [f"beta_{j + 1}" for j in range(m)]
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for idx in range(len(self.y)):
                row = [self.y[idx], self.u[idx], *self.alpha[:, idx], *self.beta[:, idx]]
                writer.writerow([format(float(v), ".17g") for v in row])
        return path

    def write_diagnostics(self, path, **extra):
        payload = self.diagnostics()
        payload.update(extra)
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return Path(path)


def _integrate_fundamental(k, z0, knots, rtol, atol):
    """Integrate the linear system across the segments in ``knots``; returns OdeSolutions."""
    n, m = k.N, k.M

    def rhs(t, z):
        av = _vec(k.a, t)
        cv = _vec(k.c, t)
        u = av @ z[:n] + cv @ z[n : n + m]
        out = np.empty_like(z)
        out[:n] = _vec(k.b, t) * u
        out[n : n + m] = -_vec(k.d, t) * u
        out[n + m] = u
        return out

    sols = []
    z = np.asarray(z0, dtype=float)
    for lo, hi in zip(knots[:-1], knots[1:]):
        res = integrate.solve_ivp(rhs, (lo, hi), z, method="DOP853", rtol=rtol, atol=atol, dense_output=True)
        if res.status != 0:
            raise NumericalError(f"ODE integration failed on [{lo}, {hi}]: {res.message}")
        sols.append(res.sol)
        z = res.y[:, -1]
    return sols, z


def solve_bvp(
    k: KernelFactorization,
    eps=ENDPOINT_OFFSET,
    n_grid=2001,
    rtol=1e-10,
    atol=1e-12,
    null_tol=1e-6,
) -> BvpSolution:
    """Solve the boundary-value problem for a semidegenerate kernel.

    Each of the M fundamental solutions starts at ``eps`` with beta equal to
    a unit vector and alpha set from the leading power behaviour of the
    integrals defining it; the M conditions at ``1 - eps`` form a matrix
    whose SVD null vector selects the solution, which is then scaled to unit
    mass.
    """
    n, m = k.N, k.M
    e0, e1 = k.exponents
    knots = [eps] + [s for s in k.S if eps < s < 1.0 - eps] + [1.0 - eps]

    b_pow = [_local_power(f, 0.0, eps) for f in k.b]
    d_pow = [_local_power(f, 1.0, eps, reflect=True) for f in k.d]
    a_eps, c_eps, b_eps = _vec(k.a, eps), _vec(k.c, eps), _vec(k.b, eps)
    t_end = 1.0 - eps
    a_end, c_end, d_end = _vec(k.a, t_end), _vec(k.c, t_end), _vec(k.d, t_end)
    kappa = d_end * eps / (1.0 + e1 + np.asarray(d_pow))

    fundamentals = []
    cond = np.empty((m, m))
    for j in range(m):
        beta0 = np.zeros(m)
        beta0[j] = 1.0
        u0 = float(c_eps @ beta0)
        alpha0 = b_eps * u0 * eps / (1.0 + e0 + np.asarray(b_pow))
        u0 = float(a_eps @ alpha0 + c_eps @ beta0)
        z0 = np.concatenate([alpha0, beta0, [u0 * eps / (1.0 + e0)]])
        sols, z_end = _integrate_fundamental(k, z0, knots, rtol, atol)
        u_end = float(a_end @ z_end[:n] + c_end @ z_end[n : n + m])
        cond[:, j] = z_end[n : n + m] - kappa * u_end
        fundamentals.append(sols)

    _, sv, vt = np.linalg.svd(cond)
    weights = vt[-1]
    if m >= 2:
        ratio = float(sv[-1] / sv[-2]) if sv[-2] > 0 else math.inf
    else:
        scale_ref = max(1.0, float(np.max(np.abs(cond))))
        # one fundamental: compare the residual condition against the size of beta along the path
        probe = np.linspace(eps, 1.0 - eps, 33)
        beta_scale = max(
            abs(float(_eval(fundamentals[0], knots, t)[n])) for t in probe
        )
        ratio = float(sv[-1] / max(beta_scale, scale_ref * 0 + 1e-300))
    if not ratio < null_tol:
        raise NumericalError(
            f"no null vector for the boundary conditions: singular values {sv.tolist()}, ratio {ratio:.3e}"
        )

    grid = np.linspace(0.0, 1.0, n_grid)
    grid[0], grid[-1] = eps, 1.0 - eps
    states = np.array([sum(w * _eval(f, knots, t) for w, f in zip(weights, fundamentals)) for t in grid])
    u_grid = np.array([float(_vec(k.a, t) @ z[:n] + _vec(k.c, t) @ z[n : n + m]) for t, z in zip(grid, states)])

    right_tail = u_grid[-1] * eps / (1.0 + e1)
    total = states[-1, n + m] + right_tail
    if not (math.isfinite(total) and total != 0.0):
        raise NumericalError(f"cannot normalize the BVP solution, mass {total!r}")
    scale = 1.0 / total
    states *= scale
    u_grid *= scale
    if u_grid.min() < -1e-9:
        raise NumericalError(f"BVP solution is negative (min {u_grid.min():.3e}); factorization or solver fault")

    pieces = []
    for s_idx, (lo, hi) in enumerate(zip(knots[:-1], knots[1:])):
        pieces.append((lo, hi, [f[s_idx] for f in fundamentals]))

    fitted = (
        _fit_power(grid[:6], u_grid[:6]),
        _fit_power(1.0 - grid[-6:][::-1], u_grid[-6:][::-1]),
    )
    return BvpSolution(
        y=grid,
        alpha=states[:, :n].T.copy(),
        beta=states[:, n : n + m].T.copy(),
        u=u_grid,
        singular_values=tuple(float(v) for v in sv),
        null_ratio=ratio,
        exponents=(e0, e1),
        fitted_exponents=fitted,
        breakpoints=tuple(k.S),
        factorization=k,
        _pieces=pieces,
        _weights=weights,
        _scale=scale,
        _tails=(states[0, n + m], right_tail * scale),
    )


def _eval(sols, knots, t):
    for idx, (lo, hi) in enumerate(zip(knots[:-1], knots[1:])):
        if lo <= t <= hi:
            return sols[idx](t)
    raise DomainError(f"{t} outside [{knots[0]}, {knots[-1]}]")


def _fit_power(dist, vals):
    """Least-squares slope of log u against log distance to the endpoint."""
    ok = (vals > 0) & (dist > 0)
    if ok.sum() < 2:
        return math.nan
    return float(np.polyfit(np.log(dist[ok]), np.log(vals[ok]), 1)[0])
