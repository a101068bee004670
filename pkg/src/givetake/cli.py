"""Command-line front end: ``givetake <command> --config C --seed S --out DIR``.

Every run writes its outputs plus ``manifest.json`` (normalized config, seed,
package versions, SHA-256 of each output) into ``--out``.  Exit codes: 0 ok,
2 bad config or failed ergodicity check, 3 numerical failure, 4 failed
verification.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import platform
import sys
from pathlib import Path

import numpy as np

from .config import COMMANDS, ConfigError, build_chain, build_coverage, build_search, emit_config, load_config
from .core import BetaIntFirst, BetaOneZ
from .exceptions import DomainError, ErgodicityError, NumericalError, UnsupportedError

__all__ = ["main", "build_parser", "EXIT_OK", "EXIT_CONFIG", "EXIT_NUMERIC", "EXIT_VERIFY"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4
MANIFEST_SCHEMA = "givetake-manifest/1"


class VerificationFailed(Exception):
    def __init__(self, message, outputs=()):
        super().__init__(message)
        self.outputs = list(outputs)


def _dump(path, payload):
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return Path(path)


def _jsonable(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"not JSON serializable: {type(v).__name__}")


def _beta_one_param(law):
    if isinstance(law, BetaOneZ):
        return law.z
    if isinstance(law, BetaIntFirst) and law.a == 1:
        return float(law.b)
    raise UnsupportedError("closed-form densities need beta(1, z) proportions; use the bvp command")


def _analytic(spec):
    from .analytic import stationary_density

    return stationary_density(spec.p, _beta_one_param(spec.left), _beta_one_param(spec.right))


def cmd_density(cfg, seed, out):
    from .analytic import write_density_csv

    d = _analytic(build_chain(cfg.spec))
    write_density_csv(d, out / "density.csv", n=int(cfg.options["grid"]))
    _dump(out / "density.json", d.metadata())
    return ["density.csv", "density.json"]


def cmd_simulate(cfg, seed, out):
    from .chain import simulate

    traj = simulate(build_chain(cfg.spec), int(cfg.options["n_steps"]), seed)
    traj.to_csv(out / "trajectory.csv")
    return ["trajectory.csv"]


def cmd_verify(cfg, seed, out):
    from .verify import mc_fit, residual_IE

    o = cfg.options
    spec = build_chain(cfg.spec)
    d = _analytic(spec)
    report = mc_fit(spec, d, int(o["n_steps"]), int(o["burn_in"]), seed, o["ks_max"], o["tv_max"], int(o["bins"]))
    residual = residual_IE(d, spec, n_grid=int(o["residual_grid"]))
    passed = report.passed and residual <= o["residual_max"]
    payload = json.loads(report.to_json())
    payload.update({"residual_IE": residual, "residual_max": o["residual_max"], "passed": passed, "mc_passed": report.passed})
    _dump(out / "verify.json", payload)
    if not passed:
        raise VerificationFailed(
            f"verification failed: ks={report.ks:.4g} tv={report.tv:.4g} residual={residual:.3g}", ["verify.json"]
        )
    return ["verify.json"]


def cmd_bvp(cfg, seed, out):
    from .core import Mixture
    from .semidegenerate import factorize_beta_kernel, factorize_mixture_kernel, solve_bvp
    from .verify import cell_averages, kernel_oracle, residual_IE

    o = cfg.options
    spec = build_chain(cfg.spec)
    if isinstance(spec.left, (Mixture, BetaOneZ)) or isinstance(spec.right, (Mixture, BetaOneZ)):
        k = factorize_mixture_kernel(spec.p, spec.left, spec.right)
    else:
        k = factorize_beta_kernel(spec.p, spec.left, spec.right)
    sol = solve_bvp(k, n_grid=int(o["grid"]))
    residual = residual_IE(sol, spec, n_grid=int(o["residual_grid"]))
    extra = {"residual_IE": residual, "residual_max": o["residual_max"]}
    passed = residual <= o["residual_max"]
    if int(o["oracle_cells"]) > 0:
        grid = kernel_oracle(spec, int(o["oracle_cells"]))
        gap = float(np.max(np.abs(cell_averages(sol, grid.n) - grid.cell_density)))
        extra.update({"oracle_sup_gap": gap, "oracle_max": o["oracle_max"]})
        passed = passed and gap <= o["oracle_max"]
    extra["passed"] = passed
    sol.to_csv(out / "bvp.csv")
    sol.write_diagnostics(out / "bvp_diagnostics.json", **extra)
    if not passed:
        raise VerificationFailed(f"BVP verification failed: {extra}", ["bvp.csv", "bvp_diagnostics.json"])
    return ["bvp.csv", "bvp_diagnostics.json"]


def cmd_coverage(cfg, seed, out):
    from .apps import run_coverage

    o = cfg.options
    res = run_coverage(build_coverage(cfg.spec, int(o["grid"])), int(o["n_steps"]), seed)
    res.occupancy_csv(out / "occupancy.csv")
    meta = res.metadata()
    meta["tv_max"] = o["tv_max"]
    meta["product_form_passed"] = meta["product_tv"] <= o["tv_max"]
    _dump(out / "coverage.json", meta)
    if not meta["product_form_passed"]:
        raise VerificationFailed(
            f"product-form TV {meta['product_tv']:.4f} exceeds {o['tv_max']}", ["occupancy.csv", "coverage.json"]
        )
    return ["occupancy.csv", "coverage.json"]


def cmd_search(cfg, seed, out):
    from .apps import search_run

    res = search_run(build_search(cfg.spec), seed)
    res.to_csv(out / "search_trace.csv")
    _dump(
        out / "search.json",
        {"best": res.best.tolist(), "best_value": res.best_value, "travel": res.travel, "n_steps": res.n_steps},
    )
    return ["search_trace.csv", "search.json"]


HANDLERS = {
    "density": cmd_density,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "bvp": cmd_bvp,
    "coverage": cmd_coverage,
    "search": cmd_search,
}


HELP = {
    "density": "closed-form stationary density on a grid (x,pi CSV)",
    "simulate": "seeded trajectory (step,x CSV)",
    "verify": "Monte Carlo fit and integral-equation residual of the closed form",
    "bvp": "stationary density from the boundary-value solver",
    "coverage": "2-D robot coverage occupancy grid",
    "search": "sequential random search trace",
}


def _versions():
    import scipy

    from . import __version__

    return {"givetake": __version__, "numpy": np.__version__, "scipy": scipy.__version__, "python": platform.python_version()}


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out, cfg, seed, outputs, status, message=""):
    payload = {
        "schema": MANIFEST_SCHEMA,
        "command": cfg.command,
        "config": json.loads(emit_config(cfg)),
        "seed": seed,
        "versions": _versions(),
        "outputs": {name: _sha256(out / name) for name in outputs if (out / name).exists()},
        "status": status,
        "message": message,
    }
    return _dump(out / "manifest.json", payload)


def _u64(text):
    try:
        v = int(text, 10)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {v}")
    return v


def build_parser():
    parser = argparse.ArgumentParser(prog="givetake", description="Give-and-take Markov chains on [0, 1].")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, help=HELP[name])
        sp.add_argument("--config", required=True, help="JSON run configuration")
        sp.add_argument("--seed", type=_u64, default=None, help="unsigned 64-bit seed (overrides the config)")
        sp.add_argument("--out", default=None, help="output directory (overrides the config)")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help and 2 for usage errors
        return EXIT_OK if not exc.code else EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        if cfg.command != args.command:
            raise ConfigError(f"config is for '{cfg.command}', not '{args.command}'")
    except ConfigError as exc:
        print(f"givetake: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    seed = args.seed if args.seed is not None else (cfg.seed if cfg.seed is not None else 0)
    out_dir = args.out or cfg.out or "."
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    outputs, status, code, message = [], "ok", EXIT_OK, ""
    try:
        outputs = HANDLERS[cfg.command](cfg, seed, out)
    except VerificationFailed as exc:
        status, code, message = "verification-failed", EXIT_VERIFY, str(exc)
        outputs = exc.outputs
    except (ErgodicityError, UnsupportedError, DomainError) as exc:
        status, code, message = "config-error", EXIT_CONFIG, str(exc)
    except (NumericalError, FloatingPointError, ArithmeticError) as exc:
        status, code, message = "numeric-error", EXIT_NUMERIC, str(exc)
    write_manifest(out, cfg, seed, outputs, status, message)
    if code:
        print(f"givetake {cfg.command}: {message}", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
