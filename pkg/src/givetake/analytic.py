"""Closed-form stationary densities for beta(1, l) / beta(1, r) jump laws.

Three constructors are provided:

* :func:`stationary_density_general` evaluates

      pi(x) = C x^l (r/(1-x) + l/x) exp(-r J_R(x) - l J_L(x)),

  with ``J_L(x) = int_{1/2}^x p(t)/t dt`` and ``J_R(x) = int_{1/2}^x p(t)/(1-t) dt``;
* :func:`stationary_density_polynomial` uses the expansion of a polynomial
  ``p`` around both endpoints;
* :func:`stationary_density_piecewise` glues beta-shaped pieces for a
  piecewise-constant ``p`` with common ``l = r = z``.

Every constructor returns a :class:`DensityFunction` normalized to unit mass.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Tuple

import numpy as np
from scipy import integrate, interpolate, special

from ._validation import check_positive, check_unit
from .core import (
    Constant,
    Indicator,
    Linear,
    PiecewiseConstant,
    Polynomial,
    SearchForm,
    check_E1,
)
from .exceptions import DomainError, ErgodicityError, NumericalError, UnsupportedError
from .special import incomplete_beta, log_beta

__all__ = [
    "DensityFunction",
    "PiecewiseBetaDensity",
    "beta_density",
    "stationary_density",
    "stationary_density_general",
    "stationary_density_polynomial",
    "stationary_density_piecewise",
    "density_cdf",
    "density_grid",
    "write_density_csv",
    "segment_integral",
]

_X_MIN = 1e-300
_X_MAX = 1.0 - 2.0**-53
_QUAD = dict(epsabs=0.0, epsrel=1e-12, limit=400)
# arrays at least this long get their CDF from an interpolated cumulative table
_CDF_TABLE_MIN = 4096


def segment_integral(func, lo, hi, left_exp=0.0, right_exp=0.0, **quad_kw):
    """Integrate ``func`` over [lo, hi] where it behaves like
    (x - lo)^left_exp (hi - x)^right_exp at the ends.

    The algebraic factor is divided out and handed to QUADPACK's QAWS rule,
    so exponents arbitrarily close to -1 are integrated without truncation.
    """
    opts = dict(_QUAD)
    opts.update(quad_kw)
    if hi <= lo:
        return 0.0
    if left_exp == 0.0 and right_exp == 0.0:
        val, _ = integrate.quad(func, lo, hi, **opts)
        return val

    eps_lo = lo + max(_X_MIN, abs(lo) * 2.0**-52)
    eps_hi = hi - max(_X_MIN, abs(hi) * 2.0**-53)

    def regular(x):
        x = min(max(x, eps_lo), eps_hi)
        out = func(x)
        if out == 0.0:
            return 0.0
        return out / ((x - lo) ** left_exp * (hi - x) ** right_exp)

    val, _ = integrate.quad(regular, lo, hi, weight="alg", wvar=(left_exp, right_exp), **opts)
    return val


@dataclass(frozen=True, eq=False)
class DensityFunction:
    """Normalized stationary density on (0, 1).

    Attributes
    ----------
    log_kernel : callable
        Log of the unnormalized density on the open interval (vectorized).
    log_norm : float
        Log of the constant multiplying ``exp(log_kernel)``.
    form : str
        One of ``general``, ``polynomial``, ``piecewise-beta``, ``product-beta``, ``bvp``.
    exponents : tuple of float
        Powers of x near 0 and of (1 - x) near 1.
    breakpoints : tuple of float
        Interior points where the density may lose smoothness.
    """

    log_kernel: Callable
    log_norm: float
    form: str
    exponents: Tuple[float, float]
    breakpoints: Tuple[float, ...] = ()
    params: Dict = field(default_factory=dict)

    @property
    def C(self):
        return math.exp(self.log_norm)

    def _interior(self, x):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return np.exp(self.log_norm + self.log_kernel(x))

    def _endpoint_value(self, at_one):
        e = self.exponents[1 if at_one else 0]
        if e < 0:
            return math.inf
        if e > 0:
            return 0.0
        x = _X_MAX if at_one else 1e-200
        return float(self._interior(np.array([x]))[0])

    def pdf(self, x):
        """Density values; limits at 0 and 1, +inf where the density is unbounded."""
        x_arr = np.asarray(check_unit(x, "x"), dtype=float)
        flat = np.atleast_1d(x_arr).ravel()
        out = np.empty_like(flat)
        inner = (flat > 0) & (flat < 1)
        if inner.any():
            out[inner] = self._interior(flat[inner])
        if (flat == 0).any():
            out[flat == 0] = self._endpoint_value(False)
        if (flat == 1).any():
            out[flat == 1] = self._endpoint_value(True)
        out = out.reshape(x_arr.shape)
        return float(out) if out.ndim == 0 else out

    __call__ = pdf

    def logpdf(self, x):
        with np.errstate(divide="ignore"):
            return np.log(self.pdf(x))

    def cdf(self, x):
        return density_cdf(self, x)

    def segments(self):
        knots = (0.0,) + tuple(self.breakpoints) + (1.0,)
        return list(zip(knots[:-1], knots[1:]))

    def _scalar(self, x):
        return float(self._interior(np.array([x]))[0])

    def integrate(self, lo=0.0, hi=1.0):
        """Mass of [lo, hi] by adaptive quadrature honouring endpoint exponents."""
        total = 0.0
        for a, b in self.segments():
            a2, b2 = max(a, lo), min(b, hi)
            if b2 <= a2:
                continue
            e_left = self.exponents[0] if a2 == 0.0 else 0.0
            e_right = self.exponents[1] if b2 == 1.0 else 0.0
            total += segment_integral(self._scalar, a2, b2, e_left, e_right)
        return total

    def metadata(self):
        meta = {
            "form": self.form,
            "C": self.C,
            "exponent_at_0": self.exponents[0],
            "exponent_at_1": self.exponents[1],
            "breakpoints": list(self.breakpoints),
        }
        meta.update({k: v for k, v in self.params.items() if isinstance(v, (int, float, str, list, tuple))})
        return meta


def _normalize(log_kernel, exponents, breakpoints):
    """Log of the constant making exp(log_kernel) a probability density."""
    probe = np.linspace(0.0, 1.0, 401)[1:-1]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        shift = float(np.nanmax(log_kernel(probe)))
    tmp = DensityFunction(log_kernel, -shift, "tmp", exponents, tuple(breakpoints))
    mass = tmp.integrate()
    if not (mass > 0 and math.isfinite(mass)):
        raise NumericalError(f"density mass is not a positive finite number: {mass!r}")
    return -shift - math.log(mass)


@dataclass(frozen=True, eq=False)
class PiecewiseBetaDensity(DensityFunction):
    """Density glued from beta-shaped pieces C_i x^(z(1-p_i)-1) (1-x)^(z p_i - 1)."""

    levels: Tuple[float, ...] = ()
    z: float = 1.0
    constants: Tuple[float, ...] = ()

    @property
    def knots(self):
        return (0.0,) + tuple(self.breakpoints) + (1.0,)

    def piece_exponents(self, i):
        return self.z * (1.0 - self.levels[i]), self.z * self.levels[i]

    def limits_at(self, j):
        """(pi(s_j-), pi(s_j+)) at interior knot s_j, j = 1..k-1."""
        s = self.knots[j]
        vals = []
        for i in (j - 1, j):
            a, b = self.piece_exponents(i)
            vals.append(self.constants[i] * s ** (a - 1.0) * (1.0 - s) ** (b - 1.0))
        return tuple(vals)

    def metadata(self):
        meta = super().metadata()
        meta.update({"levels": list(self.levels), "z": self.z, "constants": list(self.constants)})
        return meta


def beta_density(a, b) -> DensityFunction:
    """The beta(a, b) density as a product-beta form."""
    a = check_positive(a, "a")
    b = check_positive(b, "b")

    def log_kernel(x):
        x = np.asarray(x, dtype=float)
        return (a - 1.0) * np.log(x) + (b - 1.0) * np.log1p(-x)

    return DensityFunction(log_kernel, -log_beta(a, b), "product-beta", (a - 1.0, b - 1.0), (), {"a": a, "b": b})


# ---------------------------------------------------------------------------
# General formula
# ---------------------------------------------------------------------------


def _quad_log_integrals(p, x, base=0.5):
    """Adaptive-quadrature version of :meth:`log_integrals` (used as fallback/oracle)."""
    cuts = sorted(set(p.discontinuities))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    over_t = np.empty_like(x)
    over_1mt = np.empty_like(x)
    pf = lambda t: float(p(t))  # noqa: E731
    limits = (p.limit_at_zero, p.limit_at_one)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for idx, xi in enumerate(x):
            over_t[idx], over_1mt[idx] = _quad_pair(pf, cuts, xi, base, limits)
    return over_t, over_1mt


def _quad_pair(pf, cuts, xi, base, limits):
    # the 1/t and 1/(1-t) singularities are taken out analytically with the
    # endpoint limits of p; quadrature only sees the bounded remainder
    p0, p1 = limits
    lo, hi, sign = (base, xi, 1.0) if xi >= base else (xi, base, -1.0)
    pts = [c for c in cuts if lo < c < hi]
    knots = [lo] + pts + [hi]
    acc_t = p0 * (math.log(hi) - math.log(lo))
    acc_m = p1 * (math.log1p(-lo) - math.log1p(-hi))
    for a, b in zip(knots[:-1], knots[1:]):
        acc_t += integrate.quad(lambda t: (pf(t) - p0) / t, a, b, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
        acc_m += integrate.quad(lambda t: (pf(t) - p1) / (1.0 - t), a, b, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
    return sign * acc_t, sign * acc_m


def stationary_density_general(p, l, r, inner="closed") -> DensityFunction:
    """Stationary density for beta(1, l) left and beta(1, r) right proportions.

    Parameters
    ----------
    p : DirectionFunction
        Must pass :func:`check_E1`.
    l, r : float
        Second parameters of the left and right proportion laws.
    inner : {"closed", "quad"}
        How the two integrals in the exponent are evaluated.
    """
    l = check_positive(l, "l")
    r = check_positive(r, "r")
    report = check_E1(p)
    if not report.satisfied:
        raise ErgodicityError(report.explanation)
    if inner == "closed":
        integrals = p.log_integrals
    elif inner == "quad":
        integrals = lambda x: _quad_log_integrals(p, x)  # noqa: E731
    else:
        raise DomainError(f"inner must be 'closed' or 'quad', got {inner!r}")

    def log_kernel(x):
        x = np.asarray(x, dtype=float)
        over_t, over_1mt = integrals(x)
        return (
            (l - 1.0) * np.log(x)
            - np.log1p(-x)
            + np.log(r * x + l * (1.0 - x))
            - r * over_1mt
            - l * over_t
        )

    exponents = (l * (1.0 - p.limit_at_zero) - 1.0, r * p.limit_at_one - 1.0)
    breaks = tuple(sorted(set(p.discontinuities)))
    log_norm = _normalize(log_kernel, exponents, breaks)
    return DensityFunction(log_kernel, log_norm, "general", exponents, breaks, {"l": l, "r": r, "inner": inner})


# ---------------------------------------------------------------------------
# Polynomial p
# ---------------------------------------------------------------------------


def _as_polynomial(p):
    if isinstance(p, Polynomial):
        return p
    if isinstance(p, Linear):
        return p.as_polynomial()
    if isinstance(p, Constant):
        return Polynomial((p.p0,))
    raise UnsupportedError(f"{type(p).__name__} is not a polynomial direction function")


def stationary_density_polynomial(p, l, r) -> DensityFunction:
    """Closed form for polynomial ``p`` with p(0) < 1 and p(1) > 0.

    With l == r and p of degree at most one the result is the beta density
    beta(l (1 - p(0)), r p(1)) and is tagged ``product-beta``.
    """
    l = check_positive(l, "l")
    r = check_positive(r, "r")
    poly = _as_polynomial(p)
    pc = np.array(poly.coefficients, dtype=float)
    qc = np.array(poly.shifted_coefficients, dtype=float)
    p0, q0 = pc[0], qc[0]
    if not (p0 < 1.0 and q0 > 0.0):
        raise ErgodicityError(f"polynomial p needs p(0) < 1 and p(1) > 0, got p(0)={p0}, p(1)={q0}")
    e0 = l * (1.0 - p0) - 1.0
    e1 = r * q0 - 1.0

    degree = int(np.max(np.nonzero(pc)[0])) if np.any(pc) else 0
    if l == r and degree <= 1:
        dens = beta_density(e0 + 1.0, e1 + 1.0)
        return DensityFunction(
            dens.log_kernel, dens.log_norm, "product-beta", dens.exponents, (), dict(dens.params, l=l, r=r)
        )

    n = np.arange(1, len(pc))
    p_series = np.concatenate([[0.0], pc[1:] / n])
    q_series = np.concatenate([[0.0], qc[1:] / n])

    def log_kernel(x):
        x = np.asarray(x, dtype=float)
        pv = np.polynomial.polynomial.polyval
        return (
            e0 * np.log(x)
            + e1 * np.log1p(-x)
            + np.log(l + (r - l) * x)
            + r * pv(x - 1.0, q_series)
            - l * pv(x, p_series)
        )

    log_norm = _normalize(log_kernel, (e0, e1), ())
    return DensityFunction(log_kernel, log_norm, "polynomial", (e0, e1), (), {"l": l, "r": r})


# ---------------------------------------------------------------------------
# Piecewise-constant p
# ---------------------------------------------------------------------------


def _as_piecewise(p):
    if isinstance(p, PiecewiseConstant):
        return p
    if isinstance(p, Indicator):
        return PiecewiseConstant((0.0, p.threshold, 1.0), (0.0, 1.0))
    if isinstance(p, SearchForm):
        pw = p.as_piecewise()
        return pw if isinstance(pw, PiecewiseConstant) else PiecewiseConstant((0.0, 1.0), (pw.p0,))
    if isinstance(p, Constant):
        return PiecewiseConstant((0.0, 1.0), (p.p0,))
    raise UnsupportedError(f"{type(p).__name__} is not piecewise constant")


_SMALL_EXPONENT = 0.05


def _power_mass(lo, hi, a, b):
    """int_lo^hi t^(a-1) (1-t)^(b-1) dt, vectorized in ``hi``; a + b > 0.

    Uses the incomplete beta when both exponents exceed -1; otherwise the
    piece avoids the non-integrable endpoint and the Gauss hypergeometric
    representation of B_x(a, b) (valid for any b when a > 0) is used, after
    reflecting t -> 1 - t when a <= 0.
    """
    hi = np.asarray(hi, dtype=float)
    # a tiny exponent at an endpoint the piece does not touch makes B(a, b)
    # huge and the incomplete-beta difference cancels; use the series instead
    near_one = b < _SMALL_EXPONENT and not np.any(hi >= 1.0)
    near_zero = a < _SMALL_EXPONENT and lo > 0.0
    if a > 0 and b > 0 and not (near_one or near_zero):
        if lo >= 0.5:
            return incomplete_beta(1.0 - lo, b, a) - incomplete_beta(1.0 - hi, b, a)
        return incomplete_beta(hi, a, b) - incomplete_beta(lo, a, b)
    if a > 0 and (b <= 0 or near_one):
        if np.any(hi >= 1.0):
            raise NumericalError("piece touching x = 1 with non-positive right exponent")
        prim = lambda x: x**a / a * special.hyp2f1(a, 1.0 - b, a + 1.0, x)  # noqa: E731
        return prim(hi) - prim(lo)
    if lo <= 0.0:
        raise NumericalError("piece touching x = 0 with non-positive left exponent")
    prim = lambda y: y**b / b * special.hyp2f1(b, 1.0 - a, b + 1.0, y)  # noqa: E731
    return prim(1.0 - lo) - prim(1.0 - hi)


def stationary_density_piecewise(p, z) -> PiecewiseBetaDensity:
    """Glued beta density for piecewise-constant ``p`` and l = r = z.

    ``p`` may be a PiecewiseConstant, Indicator, SearchForm or Constant; the
    first level must be < 1 and the last > 0.
    """
    z = check_positive(z, "z")
    pw = _as_piecewise(p)
    s, lv, k = pw.breakpoints, pw.levels, pw.k
    if not (lv[0] < 1.0 and lv[-1] > 0.0):
        raise ErgodicityError(f"piecewise p needs p_1 < 1 and p_k > 0, got p_1={lv[0]}, p_k={lv[-1]}")

    # log C_i - log C_1 from continuity at each breakpoint
    rel = [0.0]
    for j in range(1, k):
        sj = s[j]
        rel.append(rel[-1] + z * (lv[j] - lv[j - 1]) * (math.log(sj) - math.log1p(-sj)))
    masses = []
    for i in range(k):
        m = float(_power_mass(s[i], s[i + 1], z * (1.0 - lv[i]), z * lv[i]))
        if not (m > 0 and math.isfinite(m)):
            raise NumericalError(f"piece {i + 1} mass on [{s[i]}, {s[i + 1]}] is {m!r}")
        masses.append(m)
    ref = max(rel)
    total = sum(m * math.exp(q - ref) for m, q in zip(masses, rel))
    log_c1 = -ref - math.log(total)
    log_c = [log_c1 + q for q in rel]
    constants = tuple(math.exp(v) for v in log_c)

    inner_knots = np.asarray(s[1:-1])
    a_arr = np.array([z * (1.0 - v) for v in lv])
    b_arr = np.array([z * v for v in lv])
    logc_arr = np.array(log_c)

    def log_kernel(x):
        x = np.asarray(x, dtype=float)
        i = np.searchsorted(inner_knots, x, side="right")
        with np.errstate(divide="ignore", invalid="ignore"):
            return logc_arr[i] + (a_arr[i] - 1.0) * np.log(x) + (b_arr[i] - 1.0) * np.log1p(-x)

    exps = (z * (1.0 - lv[0]) - 1.0, z * lv[-1] - 1.0)
    return PiecewiseBetaDensity(
        log_kernel,
        0.0,
        "piecewise-beta",
        exps,
        tuple(s[1:-1]),
        {"z": z, "piece_masses": masses},
        levels=tuple(lv),
        z=z,
        constants=constants,
    )


def stationary_density(p, l, r=None):
    """Pick the most specific closed form available for ``p``.

    Piecewise-constant families with l == r use the glued form, polynomial
    families the polynomial form, everything else the general formula.
    """
    r = l if r is None else r
    if isinstance(p, (PiecewiseConstant, Indicator, SearchForm)) and l == r:
        return stationary_density_piecewise(p, l)
    if isinstance(p, (Polynomial, Linear, Constant)):
        return stationary_density_polynomial(p, l, r)
    return stationary_density_general(p, l, r)


# ---------------------------------------------------------------------------
# CDF and export
# ---------------------------------------------------------------------------


def _cdf_quad(d, x):
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    return min(max(d.integrate(0.0, x), 0.0), 1.0)


_CDF_GAUSS_NODES = 16


def _cdf_table(d, n=8193):
    """Cumulative masses on a grid refined towards both endpoints."""
    u = np.linspace(0.0, 1.0, n)
    grid = 0.5 - 0.5 * np.cos(np.pi * u)
    grid = np.unique(np.concatenate([grid, np.asarray(d.breakpoints)]))
    lo, hi = grid[:-1], grid[1:]
    # interior cells are short and the density is smooth on each, so one
    # vectorized Gauss-Legendre pass suffices; the two endpoint cells carry
    # the power-law singularities and go through adaptive quadrature
    nodes, weights = np.polynomial.legendre.leggauss(_CDF_GAUSS_NODES)
    half = 0.5 * (hi[1:-1] - lo[1:-1])
    pts = (lo[1:-1] + half)[:, None] + half[:, None] * nodes[None, :]
    cells = np.empty(len(lo))
    cells[1:-1] = half * (d.pdf(pts) @ weights)
    cells[0] = d.integrate(lo[0], hi[0])
    cells[-1] = d.integrate(lo[-1], hi[-1])
    masses = np.concatenate([[0.0], np.cumsum(cells)])
    masses /= masses[-1]
    return interpolate.PchipInterpolator(grid, masses)


def density_cdf(d: DensityFunction, x):
    """CDF of a stationary density at ``x`` in [0, 1] (scalar or array).

    Exact incomplete-beta sums for product-beta and piecewise-beta forms;
    adaptive quadrature otherwise (a monotone interpolated cumulative table for
    large arrays).
    """
    x_arr = np.asarray(check_unit(x, "x"), dtype=float)
    if d.form == "product-beta":
        out = incomplete_beta(x_arr, d.params["a"], d.params["b"], regularized=True)
    elif isinstance(d, PiecewiseBetaDensity):
        out = np.zeros_like(x_arr)
        knots = d.knots
        for i, c in enumerate(d.constants):
            lo, hi = knots[i], knots[i + 1]
            seg = np.clip(x_arr, lo, hi)
            a, b = d.piece_exponents(i)
            out = out + c * _power_mass(lo, seg, a, b)
        out = np.clip(out, 0.0, 1.0)
    elif x_arr.size >= _CDF_TABLE_MIN:
        out = np.clip(_cdf_table(d)(x_arr), 0.0, 1.0)
    else:
        flat = np.atleast_1d(x_arr).ravel()
        out = np.array([_cdf_quad(d, float(v)) for v in flat]).reshape(x_arr.shape)
    return float(out) if np.ndim(out) == 0 else out


def density_grid(d: DensityFunction, n=2001, grid=None):
    """``(x, pi)`` on ``grid`` or on ``n`` uniform interior points i/(n+1)."""
    if grid is None:
        grid = np.arange(1, n + 1) / (n + 1.0)
    grid = np.asarray(grid, dtype=float)
    return grid, d.pdf(grid)


def write_density_csv(d: DensityFunction, path, n=2001, grid=None):
    x, pi = density_grid(d, n, grid)
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "pi"])
        for xi, vi in zip(x, pi):
            writer.writerow([format(float(xi), ".17g"), format(float(vi), ".17g")])
    return path
