"""End-to-end acceptance checks; each test records one PASS/FAIL line in the terminal summary."""

import math
import time

import numpy as np
import pytest
from scipy import stats

from givetake import (
    BetaIntFirst,
    BetaOneZ,
    ChainSpec,
    Constant,
    CoverageSpec,
    Indicator,
    Linear,
    PiecewiseConstant,
    SearchSpec,
    beta_density,
    cell_averages,
    check_E1,
    density_grid,
    factorize_beta_kernel,
    kernel_oracle,
    mc_fit,
    residual_IE,
    run_coverage,
    search_run,
    solve_bvp,
    stationary_density,
    stationary_density_general,
    stationary_density_piecewise,
)

INTERIOR = np.arange(1, 1001) / 1001.0
MC_STEPS, MC_BURN = 1_000_000, 10_000


def max_rel(a, b):
    return float(np.max(np.abs(a - b) / np.abs(b)))


def local_maxima(y):
    return int(np.sum((y[1:-1] > y[:-2]) & (y[1:-1] > y[2:])))


def beta_law_check(p, z, a, b, seed):
    """Pointwise gap of the general evaluator to beta(a, b) and the MC fit report."""
    d = stationary_density_general(p, z, z)
    gap = max_rel(d.pdf(INTERIOR), stats.beta(a, b).pdf(INTERIOR))
    rep = mc_fit(ChainSpec(p, BetaOneZ(z), BetaOneZ(z)), d, MC_STEPS, MC_BURN, seed)
    return gap, rep


def test_criterion_1_symmetric_beta(record_criterion):
    t0 = time.perf_counter()
    rows = [(z, *beta_law_check(Linear(1.0, 1.0), z, z, z, seed=int(z))) for z in (1.0, 2.0, 5.0)]
    elapsed = time.perf_counter() - t0
    ok = all(gap <= 1e-10 and rep.ks <= 0.01 for _, gap, rep in rows) and elapsed < 30.0
    detail = "; ".join(f"z={z:g} rel={gap:.1e} ks={rep.ks:.4f}" for z, gap, rep in rows)
    record_criterion(1, ok, f"{detail}; {elapsed:.1f}s")
    assert ok


def test_criterion_2_asymmetric_beta(record_criterion):
    t0 = time.perf_counter()
    rows = [
        (b, c, z, *beta_law_check(Linear(b, c), z, b * z, c * z, seed=11 + i))
        for i, (b, c, z) in enumerate([(0.5, 1.0, 2.0), (0.8, 0.3, 4.0)])
    ]
    elapsed = time.perf_counter() - t0
    ok = all(gap <= 1e-10 and rep.ks <= 0.01 for *_, gap, rep in rows) and elapsed < 30.0
    detail = "; ".join(f"(b,c,z)=({b:g},{c:g},{z:g}) rel={gap:.1e} ks={rep.ks:.4f}" for b, c, z, gap, rep in rows)
    record_criterion(2, ok, f"{detail}; {elapsed:.1f}s")
    assert ok


def test_criterion_3_log_case_constants(record_criterion):
    p = PiecewiseConstant((0.0, 0.5, 1.0), (0.0, 1.0))
    d = stationary_density_piecewise(p, 1.0)
    target = 1.0 / (2.0 * math.log(2.0))
    const_gap = max(abs(c - target) for c in d.constants)
    res = residual_IE(d, ChainSpec(p, BetaOneZ(1.0), BetaOneZ(1.0)))
    ok = const_gap <= 1e-12 and res <= 1e-6
    record_criterion(3, ok, f"|C_i - 1/(2 ln 2)| = {const_gap:.1e}, residual = {res:.1e}")
    assert ok


def test_criterion_4_bvp_round_trip(record_criterion):
    sol = solve_bvp(factorize_beta_kernel(Linear(1.0, 1.0), BetaIntFirst(1, 2), BetaIntFirst(1, 2)))
    y = sol.y[(sol.y >= 0.01) & (sol.y <= 0.99)]
    sup = float(np.max(np.abs(sol.pdf(y) - stationary_density(Linear(1.0, 1.0), 2.0).pdf(y))))
    inner = (sol.y >= 0.01) & (sol.y <= 0.99)
    first = float(np.max(np.abs(sol.alpha[0] * (1 - sol.y) ** 2 - sol.beta[0] * sol.y**2)[inner]))
    ok = sup <= 1e-6 and first <= 1e-7
    record_criterion(4, ok, f"sup gap = {sup:.1e}, first integral = {first:.1e}")
    assert ok


def test_criterion_5_bvp_vs_kernel_oracle(record_criterion):
    t0 = time.perf_counter()
    law = BetaIntFirst(2, 2)
    sol = solve_bvp(factorize_beta_kernel(Linear(1.0, 1.0), law, law))
    grid = kernel_oracle(ChainSpec(Linear(1.0, 1.0), law, law), 2000)
    gap = float(np.max(np.abs(cell_averages(sol, 2000) - grid.cell_density)))
    elapsed = time.perf_counter() - t0
    ok = gap <= 2e-3 and elapsed < 120.0
    record_criterion(5, ok, f"sup cell gap = {gap:.1e}; {elapsed:.1f}s")
    assert ok


def test_criterion_6_figure_shapes(record_criterion):
    peaked = PiecewiseConstant((0.0, 0.5, 1.0), (0.0, 1.0))
    offsets = []
    for z in (2.0, 5.0, 10.0):
        x, pi = density_grid(stationary_density(peaked, z), 2001)
        offsets.append(round(float(abs(x[int(np.argmax(pi))] - 0.5) / (x[1] - x[0])), 3))
    trimodal = PiecewiseConstant(tuple(np.linspace(0.0, 1.0, 7)), (0.0, 1.0, 0.0, 1.0, 0.0, 1.0))
    _, pi = density_grid(stationary_density(trimodal, 3.0), 2001)
    modes = local_maxima(pi[1:-1])
    ok = all(o <= 1.0 for o in offsets) and modes == 3
    record_criterion(6, ok, f"peak offsets (cells) = {offsets}, trimodal maxima = {modes}")
    assert ok


def test_criterion_7_coverage(record_criterion):
    t0 = time.perf_counter()
    spec = CoverageSpec((1.0, 1.0), (Indicator(0.2), Indicator(0.5)), (3.0, 3.0), (3.0, 3.0), grid=50)
    res = run_coverage(spec, 1_000_000, seed=0)
    (x0, x1), (y0, y1) = res.argmax_cell()
    contains = x0 <= 0.2 + 1e-12 and 0.2 <= x1 + 1e-12 and y0 <= 0.5 + 1e-12 and 0.5 <= y1 + 1e-12
    tv = res.product_tv()
    elapsed = time.perf_counter() - t0
    ok = contains and tv <= 0.05 and elapsed < 60.0
    cell = f"[{x0:.2f},{x1:.2f}]x[{y0:.2f},{y1:.2f}]"
    record_criterion(7, ok, f"argmax cell {cell}, product TV = {tv:.4f}; {elapsed:.1f}s")
    assert ok


def test_criterion_8_search(record_criterion):
    spec = SearchSpec(1, lambda x: -abs(float(x[0]) - 0.7), v=0.0, schedule=lambda n: 1.0 + n, max_steps=2000)
    hits, monotone = 0, True
    for seed in range(100):
        res = search_run(spec, seed)
        hits += abs(res.best[0] - 0.7) <= 0.05
        monotone &= bool(np.all(np.diff(res.trace[:, -2]) >= 0.0))
    ok = hits >= 95 and monotone
    record_criterion(8, ok, f"{hits}/100 seeds within 0.05, monotone on every run = {monotone}")
    assert ok


def test_criterion_9_negative_controls(record_criterion):
    e1 = check_E1(Constant(1.0))
    spec = ChainSpec(Linear(1.0, 1.0), BetaOneZ(2.0), BetaOneZ(2.0))
    res = residual_IE(beta_density(3.0, 3.0), spec)
    ok = (not e1.satisfied) and res >= 0.1
    record_criterion(9, ok, f"p = 1 passes E1: {e1.satisfied}; wrong-density residual = {res:.3f}")
    assert ok
