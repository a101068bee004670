"""Seeded simulation of the give-and-take chain.

Each step picks a direction with probability ``p(x)`` of going left and then
moves a random proportion of the way to the corresponding endpoint.  Three
independent random streams (direction, left proportion, right proportion)
are spawned from one seed so that changing one law never perturbs the draws
of the others.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from ._validation import check_nonneg_int, check_unit
from .core import BetaIntFirst, BetaOneZ, ChainSpec, Mixture, ProportionLaw
from .exceptions import DomainError, UnsupportedError

__all__ = [
    "Trajectory",
    "sample_proportion",
    "draw_proportions",
    "apply_jump",
    "step",
    "simulate",
    "spawn_streams",
    "child_seeds",
]

SeedLike = Union[int, np.random.SeedSequence]


def _composition(law: Mixture, u):
    """Inverse-CDF composition sampling for a nonnegative mixture from one uniform.

    The component is picked from the cumulative weights mu_j / l_j and the
    uniform is rescaled inside the chosen slot before inverting that component.
    """
    weights = law.mus / law.ls
    edges = np.concatenate([[0.0], np.cumsum(weights)])
    edges[-1] = 1.0
    j = np.clip(np.searchsorted(edges, u, side="right") - 1, 0, len(weights) - 1)
    inner = (u - edges[j]) / weights[j]
    inner = np.clip(inner, 0.0, 1.0)
    with np.errstate(divide="ignore"):
        return -np.expm1(np.log1p(-inner) / law.ls[j])


def sample_proportion(law: ProportionLaw, u):
    """Map a uniform ``u`` in [0, 1] to a draw from ``law`` by inverse CDF.

    Nonnegative mixtures use composition from the same uniform; signed
    mixtures invert the closed-form CDF by bisection.
    """
    u_arr = np.asarray(check_unit(u, "u"), dtype=float)
    if isinstance(law, BetaOneZ):
        out = law.ppf(u_arr)
    elif isinstance(law, BetaIntFirst):
        out = law.ppf(u_arr)
    elif isinstance(law, Mixture):
        out = _composition(law, u_arr) if law.nonnegative_weights else law.ppf(u_arr)
    else:
        raise UnsupportedError(f"unsupported proportion law {law!r}")
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def draw_proportions(law: ProportionLaw, rng: np.random.Generator, size):
    """Draw ``size`` proportions from ``law`` using the generator ``rng``.

    beta(a, b) with integers a > 1 and b uses the a-th smallest of a + b - 1
    uniforms; every other case consumes one uniform per draw by inverse CDF.
    """
    if isinstance(law, BetaIntFirst) and law.a > 1 and float(law.b).is_integer():
        n = law.a + int(law.b) - 1
        u = rng.random((size, n))
        return np.partition(u, law.a - 1, axis=1)[:, law.a - 1]
    return np.asarray(sample_proportion(law, rng.random(size)), dtype=float).reshape(size)


def apply_jump(x, go_left, proportion):
    """New state after a jump: x - x*L when going left, x + (1 - x)*R otherwise."""
    if go_left:
        return x - x * proportion
    return x + (1.0 - x) * proportion


def step(spec: ChainSpec, x, rng: np.random.Generator):
    """One transition from ``x``; U, then L or R, are drawn from ``rng``."""
    x = check_unit(x, "x")
    u = rng.random()
    go_left = u < float(spec.p(x))
    law = spec.left if go_left else spec.right
    prop = float(draw_proportions(law, rng, 1)[0])
    return min(max(apply_jump(x, go_left, prop), 0.0), 1.0)


def spawn_streams(seed: SeedLike):
    """Three independent generators (direction, left, right) derived from ``seed``."""
    if isinstance(seed, np.random.SeedSequence):
        ss = seed
    else:
        if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or not 0 <= seed < 2**64:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
        ss = np.random.SeedSequence(int(seed))
    return tuple(np.random.Generator(np.random.PCG64(child)) for child in child_seeds(ss, 3))


def child_seeds(ss: np.random.SeedSequence, n):
    """Deterministic children of ``ss``; unlike ``spawn`` this does not mutate ``ss``."""
    return [
        np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + (i,), pool_size=ss.pool_size)
        for i in range(n)
    ]


@dataclass(frozen=True, eq=False)
class Trajectory:
    states: np.ndarray
    seed: SeedLike
    spec: ChainSpec

    def __len__(self):
        return len(self.states)

    def to_csv(self, path):
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["step", "x"])
            for i, x in enumerate(self.states):
                writer.writerow([i, format_float(x)])
        return path


def format_float(x):
    """Locale-independent 17-significant-digit rendering."""
    return format(float(x), ".17g")


def _fast_p(p):
    """Scalar evaluator avoiding numpy overhead in the simulation loop."""
    from .core import Constant, Indicator, Linear, PiecewiseConstant, SearchForm

    if isinstance(p, Constant):
        p0 = p.p0
        return lambda x: p0
    if isinstance(p, Linear):
        b, c = p.b, p.c
        return lambda x: c * x + (1.0 - b) * (1.0 - x)
    if isinstance(p, Indicator):
        y = p.threshold
        return lambda x: 1.0 if x > y else 0.0
    if isinstance(p, SearchForm):
        v, y = p.v, p.pivot
        return lambda x: v if x < y else 1.0 - v
    if isinstance(p, PiecewiseConstant):
        import bisect

        inner = list(p.breakpoints[1:-1])
        levels = list(p.levels)
        return lambda x: levels[bisect.bisect_right(inner, x)]
    coeffs = list(reversed(p.coefficients))

    def horner(x):
        acc = 0.0
        for c in coeffs:
            acc = acc * x + c
        return acc

    return horner


def simulate(spec: ChainSpec, n_steps: int, seed: SeedLike = 0) -> Trajectory:
    """Run ``n_steps`` transitions from ``spec.x0``; bit-reproducible per seed."""
    n_steps = check_nonneg_int(n_steps, "n_steps")
    g_dir, g_left, g_right = spawn_streams(seed)
    states = np.empty(n_steps + 1)
    states[0] = spec.x0
    if n_steps:
        us = g_dir.random(n_steps).tolist()
        ls = draw_proportions(spec.left, g_left, n_steps).tolist()
        rs = draw_proportions(spec.right, g_right, n_steps).tolist()
        p = _fast_p(spec.p)
        x = spec.x0
        out = [x]
        append = out.append
        for u, l, r in zip(us, ls, rs):
            if u < p(x):
                x = x - x * l
            else:
                x = x + (1.0 - x) * r
                if x > 1.0:
                    x = 1.0
            append(x)
        states[:] = out
    return Trajectory(states, seed, spec)
