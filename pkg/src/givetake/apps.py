"""Two applications of the chain: stochastic room coverage and sequential random search."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from ._validation import check_nonneg_int, check_positive, check_positive_int
from .chain import apply_jump, child_seeds, format_float, simulate, spawn_streams, step
from .core import BetaOneZ, ChainSpec, DirectionFunction, SearchForm
from .exceptions import DomainError

__all__ = [
    "CoverageSpec",
    "CoverageResult",
    "coverage_step",
    "coverage_streams",
    "run_coverage",
    "SearchSpec",
    "SearchResult",
    "search_run",
    "default_schedule",
    "concentration_mass",
]


# ---------------------------------------------------------------------------
# Coverage
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoverageSpec:
    """A robot moving in a d1 x d2 room, each axis an independent chain.

    Direction functions act on coordinates normalized by the room size.
    """

    dims: Tuple[float, float]
    p: Tuple[DirectionFunction, DirectionFunction]
    l: Tuple[float, float]
    r: Tuple[float, float]
    start: Optional[Tuple[float, float]] = None
    grid: int = 50

    def __post_init__(self):
        dims = tuple(check_positive(d, "room dimension") for d in self.dims)
        if len(dims) != 2 or len(self.p) != 2 or len(self.l) != 2 or len(self.r) != 2:
            raise DomainError("coverage needs exactly two axes")
        for v in (*self.l, *self.r):
            check_positive(v, "proportion parameter")
        start = self.start if self.start is not None else (0.5 * dims[0], 0.5 * dims[1])
        start = tuple(float(s) for s in start)
        if not all(0.0 <= s <= d for s, d in zip(start, dims)):
            raise DomainError(f"start {start} outside the room {dims}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "grid", check_positive_int(self.grid, "grid"))

    def axis_spec(self, i) -> ChainSpec:
        """The normalized 1-D chain driving axis ``i``."""
        return ChainSpec(self.p[i], BetaOneZ(self.l[i]), BetaOneZ(self.r[i]), self.start[i] / self.dims[i])


def coverage_streams(seed):
    """Per-axis seed sequences; axis i only ever consumes its own."""
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(int(seed))
    return child_seeds(root, 2)


def coverage_step(spec: CoverageSpec, pos, rngs):
    """One robot move; ``rngs`` holds one generator per axis."""
    out = []
    for i in range(2):
        d = spec.dims[i]
        x = min(max(float(pos[i]) / d, 0.0), 1.0)
        out.append(step(spec.axis_spec(i), x, rngs[i]) * d)
    return tuple(out)


@dataclass(frozen=True, eq=False)
class CoverageResult:
    path: np.ndarray  # (n_steps + 1, 2), room coordinates
    occupancy: np.ndarray  # (grid, grid) visit counts, axis 0 along d1
    dims: Tuple[float, float]
    seed: int

    @property
    def n_visits(self):
        return int(self.occupancy.sum())

    @property
    def joint(self):
        return self.occupancy / self.occupancy.sum()

    @property
    def marginals(self):
        j = self.joint
        return j.sum(axis=1), j.sum(axis=0)

    def product_tv(self):
        """Total variation between the joint histogram and the product of its marginals."""
        m1, m2 = self.marginals
        return float(0.5 * np.abs(self.joint - np.outer(m1, m2)).sum())

    def argmax_cell(self):
        i, j = np.unravel_index(np.argmax(self.occupancy), self.occupancy.shape)
        g1, g2 = self.occupancy.shape
        return (
            (i * self.dims[0] / g1, (i + 1) * self.dims[0] / g1),
            (j * self.dims[1] / g2, (j + 1) * self.dims[1] / g2),
        )

    def occupancy_csv(self, path):
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            for row in self.occupancy:
                writer.writerow([int(v) for v in row])
        return path

    def metadata(self):
        return {
            "dims": list(self.dims),
            "grid": list(self.occupancy.shape),
            "n_visits": self.n_visits,
            "product_tv": self.product_tv(),
            "argmax_cell": [list(c) for c in self.argmax_cell()],
            "seed": self.seed,
            "rows": "axis 1 (d1) bins, low to high",
            "columns": "axis 2 (d2) bins, low to high",
        }


def run_coverage(spec: CoverageSpec, n_steps, seed=0) -> CoverageResult:
    """Simulate ``n_steps`` robot moves and histogram every visited location (start included).

    Each axis is the 1-D chain simulated on its own seed sub-stream, so the
    axes are independent and each marginal is exactly a 1-D trajectory.
    """
    n_steps = check_nonneg_int(n_steps, "n_steps")
    streams = coverage_streams(seed)
    cols = []
    for i in range(2):
        traj = simulate(spec.axis_spec(i), n_steps, streams[i])
        cols.append(traj.states * spec.dims[i])
    path = np.column_stack(cols)
    g = spec.grid
    edges = [np.linspace(0.0, spec.dims[i], g + 1) for i in range(2)]
    occ, _, _ = np.histogram2d(path[:, 0], path[:, 1], bins=edges)
    return CoverageResult(path, occ.astype(np.int64), spec.dims, int(seed))


# ---------------------------------------------------------------------------
# Random search
# ---------------------------------------------------------------------------


def default_schedule(n):
    return 1.0 + n / 100.0


@dataclass(frozen=True)
class SearchSpec:
    """Maximize ``objective`` over [0, 1]^dim with the coordinate-wise chain.

    ``schedule(n)`` gives the beta(1, z_n) parameter used for step n; it must be
    nondecreasing.  The run stops after ``max_steps`` steps or once the L1
    travel reaches ``max_travel``, whichever comes first.
    """

    dim: int
    objective: Callable
    v: float = 0.0
    schedule: Callable = default_schedule
    start: Optional[Tuple[float, ...]] = None
    max_steps: Optional[int] = 2000
    max_travel: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "dim", check_positive_int(self.dim, "dim"))
        v = float(self.v)
        if not 0.0 <= v <= 0.5:
            raise DomainError(f"v must lie in [0, 1/2], got {v!r}")
        object.__setattr__(self, "v", v)
        start = self.start if self.start is not None else (0.5,) * self.dim
        start = tuple(float(s) for s in np.atleast_1d(start))
        if len(start) != self.dim or not all(0.0 <= s <= 1.0 for s in start):
            raise DomainError(f"start must be a point of [0, 1]^{self.dim}, got {start}")
        object.__setattr__(self, "start", start)
        if self.max_steps is None and self.max_travel is None:
            raise DomainError("a stopping rule (max_steps or max_travel) is required")
        if self.max_steps is not None:
            object.__setattr__(self, "max_steps", check_nonneg_int(self.max_steps, "max_steps"))
        if self.max_travel is not None:
            object.__setattr__(self, "max_travel", check_positive(self.max_travel, "max_travel"))


@dataclass(frozen=True, eq=False)
class SearchResult:
    best: np.ndarray
    best_value: float
    travel: float
    trace: np.ndarray  # rows: n, z, x_1..x_d, best_value, travel
    dim: int

    @property
    def n_steps(self):
        return int(self.trace[-1, 0])

    def to_csv(self, path):
        path = Path(path)
        header = ["n", "z"] + [f"x_{j + 1}" for j in range(self.dim)] + ["best_value", "travel"]
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in self.trace:
                writer.writerow([str(int(row[0]))] + [format_float(v) for v in row[1:]])
        return path


def _evaluate(g, x):
    val = np.asarray(g(x), dtype=float)
    if val.size != 1:
        raise DomainError(f"objective must return a scalar, got shape {val.shape}")
    return float(val.reshape(()))


def search_run(spec: SearchSpec, seed=0) -> SearchResult:
    """Sequential random search driven by the give-and-take chain.

    At step n every coordinate j makes one chain step with beta(1, z_n) jumps
    and p(x) = v below the best point's j-th coordinate, 1 - v from it on.
    The best point moves only on strict improvement, after all coordinates
    of the new point are drawn.  Row 0 of the trace is the start (z is the
    schedule value at step 0).
    """
    (rng,) = spawn_streams(seed)[:1]
    x = np.array(spec.start, dtype=float)
    best = x.copy()
    best_value = _evaluate(spec.objective, best)
    travel = 0.0
    rows = [[0.0, float(spec.schedule(0)), *x, best_value, travel]]
    n = 0
    z_prev = float(spec.schedule(0))
    while True:
        if spec.max_steps is not None and n >= spec.max_steps:
            break
        if spec.max_travel is not None and travel >= spec.max_travel:
            break
        z = float(spec.schedule(n))
        if z < z_prev or z <= 0.0:
            raise DomainError(f"schedule must be positive and nondecreasing (z_{n} = {z})")
        z_prev = z
        law = BetaOneZ(z)
        new = np.empty_like(x)
        for j in range(spec.dim):
            u_dir, u_prop = rng.random(2)
            # p(x) = v below the pivot, 1 - v from it on
            go_left = u_dir < (spec.v if x[j] < best[j] else 1.0 - spec.v)
            prop = float(law.ppf(u_prop))
            new[j] = min(max(apply_jump(x[j], go_left, prop), 0.0), 1.0)
        travel += float(np.abs(new - x).sum())
        x = new
        n += 1
        value = _evaluate(spec.objective, x)
        if value > best_value:
            best, best_value = x.copy(), value
        rows.append([float(n), z, *x, best_value, travel])
    return SearchResult(best, best_value, travel, np.array(rows), spec.dim)


def concentration_mass(z, pivot=0.5, v=0.0, lo=0.4, hi=0.6):
    """Stationary mass of [lo, hi] for the search chain at a fixed pivot."""
    from .analytic import density_cdf, stationary_density_piecewise

    d = stationary_density_piecewise(SearchForm(v, pivot).as_piecewise(), z)
    c = density_cdf(d, np.array([lo, hi]))
    return float(c[1] - c[0])
