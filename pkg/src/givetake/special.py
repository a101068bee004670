"""Beta function and the unnormalized incomplete beta function.

The incomplete beta is evaluated with the modified Lentz continued fraction
for the regularized function, vectorized over numpy arrays, and rescaled by
the complete beta function.
"""

import math

import numpy as np

from .exceptions import DomainError, NumericalError

CF_TOL = 1e-14
CF_MAXITER = 300
_TINY = 1e-300


def _beta_scalar(a, b):
    if a + b < 171.0:
        return math.gamma(a) * math.gamma(b) / math.gamma(a + b)
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


def beta_fn(a, b):
    """Complete beta function B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b).

    Accepts scalars or broadcastable arrays; both arguments must be positive.
    """
    a_arr, b_arr = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
    if np.any(~(a_arr > 0)) or np.any(~(b_arr > 0)):
        raise DomainError(f"beta_fn requires a, b > 0, got a={a!r}, b={b!r}")
    if a_arr.ndim == 0:
        return _beta_scalar(float(a_arr), float(b_arr))
    out = np.empty(a_arr.shape)
    for idx in np.ndindex(a_arr.shape):
        out[idx] = _beta_scalar(a_arr[idx], b_arr[idx])
    return out


def log_beta(a, b):
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _contfrac(x, a, b):
    """Continued fraction for I_x(a, b) * a * B(a, b) / (x^a (1-x)^b).

    All arguments are 1-d arrays of equal length with 0 < x < (a+1)/(a+b+2).
    """
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _TINY, _TINY, d)
    d = 1.0 / d
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for m in range(1, CF_MAXITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        h = np.where(active, h * d * c, h)
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) >= CF_TOL
        if not active.any():
            return h
    raise NumericalError(
        f"incomplete beta continued fraction did not converge in {CF_MAXITER} iterations"
    )


def incomplete_beta(x, a, b, regularized=False):
    """Unnormalized incomplete beta B_x(a, b) = int_0^x t^(a-1) (1-t)^(b-1) dt.

    Parameters
    ----------
    x : float or array_like
        Upper limit(s) in [0, 1].
    a, b : float or array_like
        Positive shape parameters, broadcast against ``x``.
    regularized : bool
        Return I_x(a, b) = B_x(a, b) / B(a, b) instead.

    Returns
    -------
    float or ndarray
    """
    x_arr, a_arr, b_arr = np.broadcast_arrays(
        np.asarray(x, float), np.asarray(a, float), np.asarray(b, float)
    )
    scalar = x_arr.ndim == 0
    x1 = np.atleast_1d(x_arr).ravel()
    a1 = np.atleast_1d(a_arr).ravel()
    b1 = np.atleast_1d(b_arr).ravel()
    if np.any(~((x1 >= 0) & (x1 <= 1))):
        raise DomainError(f"incomplete_beta requires x in [0, 1], got {x!r}")
    if np.any(~(a1 > 0)) or np.any(~(b1 > 0)):
        raise DomainError(f"incomplete_beta requires a, b > 0, got a={a!r}, b={b!r}")

    full = np.asarray(beta_fn(a1, b1), dtype=float).reshape(a1.shape)
    out = np.zeros_like(x1)
    out[x1 == 1.0] = full[x1 == 1.0]

    inner = (x1 > 0) & (x1 < 1)
    swap = inner & (x1 > (a1 + 1.0) / (a1 + b1 + 2.0))
    direct = inner & ~swap
    if direct.any():
        xs, as_, bs = x1[direct], a1[direct], b1[direct]
        front = np.exp(as_ * np.log(xs) + bs * np.log1p(-xs)) / as_
        out[direct] = front * _contfrac(xs, as_, bs)
    if swap.any():
        xs, as_, bs = 1.0 - x1[swap], b1[swap], a1[swap]
        front = np.exp(as_ * np.log(xs) + bs * np.log(x1[swap])) / as_
        out[swap] = full[swap] - front * _contfrac(xs, as_, bs)

    if regularized:
        out = out / full
    out = out.reshape(x_arr.shape)
    return float(out) if scalar else out


def beta_interval_mass(lo, hi, a, b):
    """Integral of t^(a-1) (1-t)^(b-1) over [lo, hi] for a, b > 0.

    Differences near the right endpoint are taken through the reflected
    function so that small masses close to 1 keep their relative accuracy.
    """
    if hi <= 0.5:
        return incomplete_beta(hi, a, b) - incomplete_beta(lo, a, b)
    if lo >= 0.5:
        return incomplete_beta(1.0 - lo, b, a) - incomplete_beta(1.0 - hi, b, a)
    return (incomplete_beta(0.5, a, b) - incomplete_beta(lo, a, b)) + (
        incomplete_beta(0.5, b, a) - incomplete_beta(1.0 - hi, b, a)
    )
