"""Domain types: direction functions, jump-proportion laws and chain specs.

A direction function ``p`` gives the probability that the next jump from
state ``x`` goes left (towards 0).  All variants are immutable and evaluate
vectorized over numpy arrays.  Proportion laws describe the fraction of the
distance to the respective endpoint covered by a jump.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from ._validation import check_positive, check_positive_int, check_unit
from .exceptions import DomainError, UnsupportedError
from .special import beta_fn, incomplete_beta

__all__ = [
    "Constant",
    "Linear",
    "Polynomial",
    "PiecewiseConstant",
    "Indicator",
    "SearchForm",
    "DirectionFunction",
    "BetaOneZ",
    "BetaIntFirst",
    "Mixture",
    "ProportionLaw",
    "ChainSpec",
    "ErgodicityReport",
    "eval_p",
    "check_E1",
    "canonicalize",
    "DEFAULT_DELTAS",
]

DEFAULT_DELTAS = (0.25, 0.1, 0.01, 0.001)


def _unit_param(value, name):
    return check_unit(value, name)


# ---------------------------------------------------------------------------
# Piecewise-polynomial integrals shared by every direction function
# ---------------------------------------------------------------------------


def _shift_to_one(coeffs):
    """Exact re-expansion of sum c_m t^m into sum q_n (t - 1)^n."""
    exact = [Fraction(c) for c in coeffs]
    k = len(exact)
    q = []
    for n in range(k):
        q.append(sum(math.comb(m, n) * exact[m] for m in range(n, k)))
    return tuple(float(v) for v in q)


def _poly_eval(coeffs, x):
    return np.polynomial.polynomial.polyval(x, np.asarray(coeffs, dtype=float))


@dataclass(frozen=True)
class _Piece:
    lo: float
    hi: float
    coeffs: Tuple[float, ...]  # monomial basis at 0
    shifted: Tuple[float, ...]  # monomial basis at 1

    @classmethod
    def make(cls, lo, hi, coeffs):
        coeffs = tuple(float(c) for c in coeffs)
        return cls(float(lo), float(hi), coeffs, _shift_to_one(coeffs))

    def int_over_t(self, u, w):
        """int_u^w p(t)/t dt on this piece (u, w already clipped)."""
        c = self.coeffs
        with np.errstate(divide="ignore", invalid="ignore"):
            out = c[0] * (np.log(w) - np.log(u)) if c[0] != 0.0 else np.zeros_like(w)
        for n in range(1, len(c)):
            if c[n] != 0.0:
                out = out + c[n] * (w**n - u**n) / n
        return np.where(u == w, 0.0, out)

    def int_over_one_minus_t(self, u, w):
        """int_u^w p(t)/(1-t) dt on this piece (u, w already clipped)."""
        q = self.shifted
        with np.errstate(divide="ignore", invalid="ignore"):
            out = -q[0] * (np.log1p(-w) - np.log1p(-u)) if q[0] != 0.0 else np.zeros_like(w)
        for n in range(1, len(q)):
            if q[n] != 0.0:
                out = out - q[n] * ((w - 1.0) ** n - (u - 1.0) ** n) / n
        return np.where(u == w, 0.0, out)


class _DirectionBase:
    """Behaviour shared by all direction-function variants."""

    def __call__(self, x):
        raise NotImplementedError

    @property
    def discontinuities(self) -> Tuple[float, ...]:
        return ()

    def _pieces(self) -> Tuple[_Piece, ...]:
        raise NotImplementedError

    @property
    def limit_at_zero(self) -> float:
        """p(0+)."""
        piece = self._pieces()[0]
        return float(piece.coeffs[0])

    @property
    def limit_at_one(self) -> float:
        """p(1-)."""
        piece = self._pieces()[-1]
        return float(piece.shifted[0])

    def log_integrals(self, x, base=0.5):
        """Closed-form ``int_base^x p(t)/t dt`` and ``int_base^x p(t)/(1-t) dt``.

        Returns a pair of arrays shaped like ``x``; values at x = 0 or x = 1 may
        be infinite.
        """
        x = np.asarray(x, dtype=float)
        over_t = np.zeros_like(x)
        over_1mt = np.zeros_like(x)
        for piece in self._pieces():
            u = np.clip(base, piece.lo, piece.hi) * np.ones_like(x)
            w = np.clip(x, piece.lo, piece.hi)
            over_t = over_t + piece.int_over_t(u, w)
            over_1mt = over_1mt + piece.int_over_one_minus_t(u, w)
        return over_t, over_1mt

    def sup_on(self, lo, hi) -> float:
        raise NotImplementedError

    def inf_on(self, lo, hi) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(_DirectionBase):
    p0: float

    def __post_init__(self):
        object.__setattr__(self, "p0", _unit_param(self.p0, "p0"))

    def __call__(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.p0)

    def _pieces(self):
        return (_Piece.make(0.0, 1.0, (self.p0,)),)

    def sup_on(self, lo, hi):
        return self.p0

    def inf_on(self, lo, hi):
        return self.p0


@dataclass(frozen=True)
class Linear(_DirectionBase):
    """p(x) = c x + (1 - b)(1 - x) with b, c in (0, 1]."""

    b: float
    c: float

    def __post_init__(self):
        for name in ("b", "c"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and 0.0 < v <= 1.0):
                raise DomainError(f"Linear.{name} must lie in (0, 1], got {v!r}")
            object.__setattr__(self, name, float(v))

    @property
    def coefficients(self):
        return (1.0 - self.b, self.b + self.c - 1.0)

    def as_polynomial(self) -> "Polynomial":
        return Polynomial(self.coefficients)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.c * x + (1.0 - self.b) * (1.0 - x)

    def _pieces(self):
        return (_Piece.make(0.0, 1.0, self.coefficients),)

    def sup_on(self, lo, hi):
        return float(max(self(lo), self(hi)))

    def inf_on(self, lo, hi):
        return float(min(self(lo), self(hi)))


@dataclass(frozen=True)
class Polynomial(_DirectionBase):
    """p(x) = sum_n coefficients[n] x^n, required to map [0, 1] into [0, 1]."""

    coefficients: Tuple[float, ...]
    _grid_check: int = field(default=10_001, repr=False, compare=False)

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        if not coeffs or not all(np.isfinite(coeffs)):
            raise DomainError("Polynomial needs at least one finite coefficient")
        object.__setattr__(self, "coefficients", coeffs)
        lo = self.inf_on(0.0, 1.0)
        hi = self.sup_on(0.0, 1.0)
        if lo < -1e-12 or hi > 1.0 + 1e-12:
            raise DomainError(f"Polynomial leaves [0, 1] on [0, 1]: range [{lo}, {hi}]")

    @property
    def shifted_coefficients(self):
        """Coefficients q_n of the expansion in powers of (x - 1)."""
        return _shift_to_one(self.coefficients)

    def __call__(self, x):
        return _poly_eval(self.coefficients, np.asarray(x, dtype=float))

    def _pieces(self):
        return (_Piece.make(0.0, 1.0, self.coefficients),)

    def _candidates(self, lo, hi):
        deriv = np.polynomial.polynomial.polyder(np.asarray(self.coefficients))
        pts = [lo, hi]
        if deriv.size and np.any(deriv != 0):
            roots = np.polynomial.polynomial.polyroots(deriv) if deriv.size > 1 else []
            pts += [r.real for r in np.atleast_1d(roots) if abs(r.imag) < 1e-12 and lo <= r.real <= hi]
        grid = np.linspace(lo, hi, self._grid_check)
        return np.concatenate([grid, np.asarray(pts, dtype=float)])

    def sup_on(self, lo, hi):
        return float(np.max(self(self._candidates(lo, hi))))

    def inf_on(self, lo, hi):
        return float(np.min(self(self._candidates(lo, hi))))


@dataclass(frozen=True)
class PiecewiseConstant(_DirectionBase):
    """p(x) = levels[i] for breakpoints[i] <= x < breakpoints[i+1]; p(1) = levels[-1]."""

    breakpoints: Tuple[float, ...]
    levels: Tuple[float, ...]

    def __post_init__(self):
        s = tuple(float(v) for v in self.breakpoints)
        lv = tuple(float(v) for v in self.levels)
        if len(s) != len(lv) + 1 or len(lv) < 1:
            raise DomainError("PiecewiseConstant needs len(breakpoints) == len(levels) + 1")
        if s[0] != 0.0 or s[-1] != 1.0 or any(b <= a for a, b in zip(s, s[1:])):
            raise DomainError(f"breakpoints must increase strictly from 0 to 1, got {s}")
        for v in lv:
            _unit_param(v, "level")
        object.__setattr__(self, "breakpoints", s)
        object.__setattr__(self, "levels", lv)

    @property
    def k(self):
        return len(self.levels)

    @property
    def discontinuities(self):
        s, lv = self.breakpoints, self.levels
        return tuple(s[i] for i in range(1, self.k) if lv[i] != lv[i - 1])

    def piece_index(self, x):
        idx = np.searchsorted(np.asarray(self.breakpoints[1:-1]), x, side="right")
        return idx

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.asarray(self.levels)[self.piece_index(x)]

    def _pieces(self):
        s = self.breakpoints
        return tuple(_Piece.make(s[i], s[i + 1], (self.levels[i],)) for i in range(self.k))

    def _levels_touching(self, lo, hi):
        s = self.breakpoints
        out = [self.levels[i] for i in range(self.k) if s[i] <= hi and (s[i + 1] > lo or i == self.k - 1)]
        return out

    def sup_on(self, lo, hi):
        return max(self._levels_touching(lo, hi))

    def inf_on(self, lo, hi):
        return min(self._levels_touching(lo, hi))


@dataclass(frozen=True)
class Indicator(_DirectionBase):
    """p(x) = 1{x > threshold}."""

    threshold: float

    def __post_init__(self):
        y = float(self.threshold)
        if not 0.0 < y < 1.0:
            raise DomainError(f"Indicator threshold must lie in (0, 1), got {y!r}")
        object.__setattr__(self, "threshold", y)

    @property
    def discontinuities(self):
        return (self.threshold,)

    def __call__(self, x):
        return (np.asarray(x, dtype=float) > self.threshold).astype(float)

    def _pieces(self):
        y = self.threshold
        return (_Piece.make(0.0, y, (0.0,)), _Piece.make(y, 1.0, (1.0,)))

    # nondecreasing, so extremes sit at the interval ends
    def sup_on(self, lo, hi):
        return float(self(hi))

    def inf_on(self, lo, hi):
        return float(self(lo))


@dataclass(frozen=True)
class SearchForm(_DirectionBase):
    """p(x) = 1 - v + (2v - 1) 1{x < pivot}: level v below the pivot, 1 - v from it on."""

    v: float
    pivot: float

    def __post_init__(self):
        v = float(self.v)
        if not 0.0 <= v <= 0.5:
            raise DomainError(f"SearchForm.v must lie in [0, 1/2], got {v!r}")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "pivot", _unit_param(self.pivot, "pivot"))

    def as_piecewise(self) -> Union[PiecewiseConstant, Constant]:
        y = self.pivot
        if y <= 0.0:
            return Constant(1.0 - self.v)
        if y >= 1.0:
            # p(1) = 1 - v but p = v on [0, 1); the single point carries no mass
            return PiecewiseConstant((0.0, 1.0), (self.v,))
        return PiecewiseConstant((0.0, y, 1.0), (self.v, 1.0 - self.v))

    @property
    def discontinuities(self):
        return self.as_piecewise().discontinuities

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return 1.0 - self.v + (2.0 * self.v - 1.0) * (x < self.pivot)

    def _pieces(self):
        return self.as_piecewise()._pieces()

    def sup_on(self, lo, hi):
        vals = [float(self(lo)), float(self(hi))]
        if lo < self.pivot <= hi:
            vals.append(float(self(self.pivot)))
        return max(vals)

    def inf_on(self, lo, hi):
        vals = [float(self(lo)), float(self(hi))]
        if lo < self.pivot <= hi:
            vals.append(float(self(self.pivot)))
        return min(vals)


DirectionFunction = Union[Constant, Linear, Polynomial, PiecewiseConstant, Indicator, SearchForm]


def eval_p(p: DirectionFunction, x):
    """Evaluate the direction function at ``x`` in [0, 1] (scalar or array)."""
    x = check_unit(x, "x")
    out = p(x)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# Proportion laws
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BetaOneZ:
    """beta(1, z): density z (1 - w)^(z - 1)."""

    z: float

    def __post_init__(self):
        object.__setattr__(self, "z", check_positive(self.z, "z"))

    def pdf(self, w):
        w = np.asarray(w, dtype=float)
        with np.errstate(divide="ignore"):
            return self.z * (1.0 - w) ** (self.z - 1.0)

    def cdf(self, w):
        w = np.clip(np.asarray(w, dtype=float), 0.0, 1.0)
        with np.errstate(divide="ignore"):
            return -np.expm1(self.z * np.log1p(-w))

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        return -np.expm1(np.log1p(-u) / self.z)

    def complement_moment(self, s):
        """E[(1 - W)^s]; infinite when s <= -z."""
        return self.z / (self.z + s) if self.z + s > 0 else math.inf


@dataclass(frozen=True)
class BetaIntFirst:
    """beta(a, b) with a positive integer first parameter."""

    a: int
    b: float

    def __post_init__(self):
        if isinstance(self.a, float) and self.a.is_integer():
            object.__setattr__(self, "a", int(self.a))
        object.__setattr__(self, "a", check_positive_int(self.a, "a"))
        object.__setattr__(self, "b", check_positive(self.b, "b"))

    def pdf(self, w):
        w = np.asarray(w, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return w ** (self.a - 1) * (1.0 - w) ** (self.b - 1.0) / beta_fn(self.a, self.b)

    def cdf(self, w):
        """Finite sum 1 - (1-w)^b sum_{j<a} (b)_j / j! w^j, exact for integer a."""
        w = np.clip(np.asarray(w, dtype=float), 0.0, 1.0)
        term = np.ones_like(w)
        acc = np.ones_like(w)
        for j in range(1, self.a):
            term = term * (self.b + j - 1) / j * w
            acc = acc + term
        with np.errstate(divide="ignore", invalid="ignore"):
            tail = np.exp(self.b * np.log1p(-w)) * acc
        return np.clip(1.0 - np.where(w >= 1.0, 0.0, tail), 0.0, 1.0)

    def ppf(self, u, tol=1e-12):
        u = np.asarray(u, dtype=float)
        if self.a == 1:
            return -np.expm1(np.log1p(-u) / self.b)
        return _bisect_ppf(self.cdf, u, tol)

    def complement_moment(self, s):
        """E[(1 - W)^s] = B(a, b + s) / B(a, b); infinite when b + s <= 0."""
        if self.b + s <= 0:
            return math.inf
        return beta_fn(self.a, self.b + s) / beta_fn(self.a, self.b)

    def regularized_cdf(self, w):
        return incomplete_beta(np.clip(w, 0.0, 1.0), self.a, self.b, regularized=True)


@dataclass(frozen=True)
class Mixture:
    """Signed finite mixture with density sum_j mu_j (1 - w)^(l_j - 1).

    ``terms`` is a sequence of (mu_j, l_j) pairs with sum mu_j / l_j = 1.
    """

    terms: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        terms = tuple((float(mu), check_positive(float(l), "l_j")) for mu, l in self.terms)
        if not terms:
            raise DomainError("Mixture needs at least one term")
        object.__setattr__(self, "terms", terms)
        mass = sum(mu / l for mu, l in terms)
        if abs(mass - 1.0) > 1e-12:
            raise DomainError(f"Mixture normalization sum mu_j/l_j = {mass!r}, expected 1")
        grid = np.concatenate([np.linspace(0.0, 1.0, 10_001)[:-1], 1.0 - np.logspace(-12, -4, 50)])
        if np.any(self.pdf(grid) < 0.0):
            raise UnsupportedError("signed mixture density is negative somewhere on (0, 1)")

    @property
    def mus(self):
        return np.array([t[0] for t in self.terms])

    @property
    def ls(self):
        return np.array([t[1] for t in self.terms])

    @property
    def nonnegative_weights(self):
        return bool(np.all(self.mus >= 0))

    def pdf(self, w):
        w = np.asarray(w, dtype=float)
        out = np.zeros_like(w)
        with np.errstate(divide="ignore", invalid="ignore"):
            for mu, l in self.terms:
                out = out + mu * (1.0 - w) ** (l - 1.0)
        return out

    def cdf(self, w):
        w = np.clip(np.asarray(w, dtype=float), 0.0, 1.0)
        out = np.zeros_like(w)
        with np.errstate(divide="ignore"):
            for mu, l in self.terms:
                out = out + (mu / l) * (-np.expm1(l * np.log1p(-w)))
        return out

    def ppf(self, u, tol=1e-12):
        return _bisect_ppf(self.cdf, np.asarray(u, dtype=float), tol)

    def complement_moment(self, s):
        if np.any(self.ls + s <= 0):
            return math.inf
        return float(np.sum(self.mus / (self.ls + s)))


ProportionLaw = Union[BetaOneZ, BetaIntFirst, Mixture]


def canonicalize(law: ProportionLaw) -> ProportionLaw:
    """Map beta(1, z) given as BetaOneZ onto the BetaIntFirst(1, z) form."""
    if isinstance(law, BetaOneZ):
        return BetaIntFirst(1, law.z)
    return law


def _bisect_ppf(cdf, u, tol):
    """Vectorized inverse of a continuous nondecreasing CDF on [0, 1]."""
    lo = np.zeros_like(u)
    hi = np.ones_like(u)
    n_iter = int(math.ceil(math.log2(1.0 / tol))) + 1
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        below = cdf(mid) < u
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Chain specification and the endpoint non-absorption check
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainSpec:
    p: DirectionFunction
    left: ProportionLaw
    right: ProportionLaw
    x0: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "x0", check_unit(self.x0, "x0"))


@dataclass(frozen=True)
class ErgodicityReport:
    satisfied: bool
    delta: float
    epsilon: float
    explanation: str

    @property
    def sup(self):
        return 1.0 - self.epsilon


def _e1_sup(p, delta):
    return max(p.sup_on(0.0, delta), 1.0 - p.inf_on(1.0 - delta, 1.0))


def check_E1(p: DirectionFunction, delta: Optional[float] = None) -> ErgodicityReport:
    """Check sup_{x in [0, delta]} max{p(x), 1 - p(1 - x)} < 1.

    Without ``delta`` the largest of 0.25, 0.1, 0.01, 0.001 that works is used.
    """
    if delta is None:
        report = None
        for d in DEFAULT_DELTAS:
            report = check_E1(p, d)
            if report.satisfied:
                return report
        return report
    if not 0.0 < delta < 0.5:
        raise DomainError(f"delta must lie in (0, 1/2), got {delta!r}")
    sup = _e1_sup(p, float(delta))
    eps = 1.0 - sup
    if eps > 0:
        text = f"sup of max(p(x), 1 - p(1 - x)) on [0, {delta}] is {sup:.6g} < 1"
    else:
        text = f"sup of max(p(x), 1 - p(1 - x)) on [0, {delta}] reaches 1: the chain can be absorbed at an endpoint"
    return ErgodicityReport(bool(eps > 0), float(delta), float(eps), text)
