"""Batch command-line front end.

Subcommands (each takes a TOML config path):

* ``phantom``      rasterize and write the truth image (+ preview)
* ``forward``      write clean and noisy data vectors and the noise norm
* ``reconstruct``  run the full inversion and persist all outputs
* ``check``        run the gradient/adjoint self-tests for the configured model

Exit codes: 0 success (discrepancy stop), 2 config error, 3 solver failure,
4 iteration cap reached, 5 stagnation.  Results are only printed if they are
also persisted to files.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import io, optim, pals
from .forward import (SolverFailure, adjoint_identity_error,
                      directional_derivative_error)
from .harness import ConfigError, Experiment, load_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_MAX_ITERS = 4
EXIT_STAGNATION = 5

_STOP_CODES = {
    optim.STOP_DISCREPANCY: EXIT_OK,
    optim.STOP_MAX_ITERS: EXIT_MAX_ITERS,
    optim.STOP_STAGNATION: EXIT_STAGNATION,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="palstomo",
                                 description="Parametric level set tomography")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("phantom", "write the truth image"),
                        ("forward", "write synthetic data"),
                        ("reconstruct", "run the inversion"),
                        ("check", "gradient/adjoint self-tests")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", type=Path)
        p.add_argument("--seed", type=int, default=None,
                       help="override noise.seed")
        p.add_argument("--out", type=Path, default=None,
                       help="override output.directory")
        p.add_argument("--threads", type=int, default=None,
                       help="cap worker count (runs are single-process; "
                            "recorded for reproducibility)")
    return ap


def _experiment(args) -> tuple[Experiment, Path]:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.noise.seed = args.seed
    if args.out is not None:
        cfg.output.directory = str(args.out)
    exp = Experiment(cfg)
    out = Path(cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    return exp, out


def cmd_phantom(args) -> int:
    exp, out = _experiment(args)
    truth = exp.phantom.field(exp.grid)
    io.write_field_csv(out / "truth.csv", exp.grid, truth,
                       note="phantom property image")
    io.write_pgm(out / "truth.pgm", truth)
    print(f"wrote {out / 'truth.csv'} and {out / 'truth.pgm'}")
    return EXIT_OK


def cmd_forward(args) -> int:
    exp, out = _experiment(args)
    clean, noisy, noise_norm = exp.synthesize_data()
    io.write_data_csv(out / "data_clean.csv", clean)
    io.write_data_csv(out / "data_noisy.csv", noisy)
    io.write_metrics(out / "noise.txt", {
        "noise_norm": noise_norm,
        "noise_percent": exp.config.noise.percent,
        "seed": exp.config.noise.seed,
        "n_data": clean.size,
    })
    print(f"wrote data ({clean.size} values) and noise norm to {out}")
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    exp, out = _experiment(args)
    state, log, metrics = exp.run()
    exp.save_outputs(out, state, log, metrics)
    print(f"stop_reason={state.stop_reason} iterations={state.iteration} "
          f"(outputs in {out})")
    return _STOP_CODES[state.stop_reason]


def cmd_check(args) -> int:
    exp, out = _experiment(args)
    rng = np.random.default_rng(exp.config.noise.seed)
    p = exp.phantom.field(exp.grid)
    S = exp.fwd.sensitivity(p)
    adj = adjoint_identity_error(S, rng)
    dp = rng.standard_normal(exp.grid.shape) * 1e-2 * float(np.abs(p).mean())
    fd = directional_derivative_error(exp.fwd, p, dp)
    model0 = exp.init_pals()
    params = pals.param_indices(model0.m0, unknown_contrasts=True)
    J = optim.assemble_jacobian(model0, exp.grid, exp.fwd, params, S=None)
    r = exp.fwd.residual(pals.property_map(model0, exp.grid), exp.fwd.forward(p))
    g = optim.gradient(J, r)
    results = {
        "adjoint_identity_rel_err": adj,
        "directional_derivative_rel_err": fd,
        "gradient_norm": float(np.linalg.norm(g)),
        "adjoint_ok": adj < 1e-10,
        "directional_ok": fd < 1e-3,
    }
    io.write_metrics(out / "check.txt", results)
    for k, v in results.items():
        print(f"{k}={v}")
    return EXIT_OK if (results["adjoint_ok"] and results["directional_ok"]) else EXIT_SOLVER


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"phantom": cmd_phantom, "forward": cmd_forward,
               "reconstruct": cmd_reconstruct, "check": cmd_check}[args.command]
    try:
        return handler(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverFailure as e:
        print(f"solver failure: {e}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
