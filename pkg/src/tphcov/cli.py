"""Command line interface: ``tphcov {kernel-table,simulate,estimate,rate-study}``.

Exit codes: 0 success, 2 configuration error, 3 numerical error, 4 resource cap.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import io as tio
from .errors import NumericalError, ResourceError, TphcovError
from .estimator import assemble_pairs, fit, predict_grid
from .experiments import ExperimentConfig, ModelConfig, harmonic_mean, rate_study, theorem_eta, write_report
from .kernel import DEFAULT_TOL, kernel_eval, zonal_green
from .simulate import NoiseSpec, sample_dataset
from .spaces import space_params
from .spectral import spectral_table

log = logging.getLogger("tphcov")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_RESOURCE = 0, 2, 3, 4


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", type=Path, help="JSON configuration file")
    p.add_argument("--seed", type=int, help="master seed (overrides the config)")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--threads", type=int, default=1, help="worker threads")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="tphcov", description="Covariance estimation on two-point homogeneous spaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    kt = sub.add_parser("kernel-table", parents=[common], help="dump spectral rows and psi(t)")
    kt.add_argument("--space", default=None, help="space family, e.g. sphere, real_projective")
    kt.add_argument("--d", type=int, default=None, help="manifold dimension")
    kt.add_argument("--p", type=float, default=None, help="Sobolev order (enables kernel.csv)")
    kt.add_argument("--ell-max", type=int, default=None, help="truncation degree")
    kt.add_argument("--tol", type=float, default=None, help="truncation tolerance")
    kt.add_argument("--grid-size", type=int, default=None, help="number of t values in [-1, 1]")

    sm = sub.add_parser("simulate", parents=[common], help="simulate a dataset from a model config")
    sm.add_argument("--n", type=int, default=None)
    sm.add_argument("--r", type=int, default=None)

    es = sub.add_parser("estimate", parents=[common], help="fit the covariance estimator to a dataset")
    es.add_argument("dataset", type=Path, help="dataset JSON file")
    es.add_argument("--p", type=float, default=None)
    es.add_argument("--eta", default=None, help="penalty value or 'theorem'")
    es.add_argument("--c0", type=float, default=None, help="multiplier for --eta theorem")
    es.add_argument("--tol", type=float, default=None)
    es.add_argument("--grid", type=Path, default=None, help="JSON list of points for grid.csv")

    sub.add_parser("rate-study", parents=[common], help="run the convergence-rate study")
    return parser


def _config(args) -> dict:
    return tio.read_json(args.config) if args.config else {}


def _pick(cli_value, cfg: dict, key: str, default=None):
    if cli_value is not None:
        return cli_value
    return cfg.get(key, default)


def cmd_kernel_table(args) -> None:
    cfg = _config(args)
    space_cfg = cfg.get("space", {})
    kind = _pick(args.space, space_cfg, "kind", "sphere")
    d = _pick(args.d, space_cfg, "d", 2)
    space = space_params(kind, d)
    p = _pick(args.p, cfg, "p")
    ell_max = _pick(args.ell_max, cfg, "ell_max")
    tol = _pick(args.tol, cfg, "tol", DEFAULT_TOL)
    grid_size = _pick(args.grid_size, cfg, "grid_size", 201)
    args.out.mkdir(parents=True, exist_ok=True)
    if p is None:
        table = spectral_table(space, 20 if ell_max is None else ell_max)
    else:
        k = zonal_green(space, float(p), ell_max=ell_max, tol=tol)
        table = k.table
        t = np.linspace(-1.0, 1.0, int(grid_size))
        (args.out / "kernel.csv").write_text(tio.kernel_csv(t, kernel_eval(k, t)))
        log.info("psi truncated at ell_max=%d, tail bound %.3g", k.ell_max, k.tail_bound)
    (args.out / "spectral.csv").write_text(tio.spectral_csv(table))


def cmd_simulate(args) -> None:
    cfg = _config(args)
    space_cfg = cfg.get("space", {"kind": "sphere", "d": 2})
    space = space_params(space_cfg["kind"], space_cfg["d"])
    model = ModelConfig.from_dict(cfg.get("model")).build(space)
    noise = NoiseSpec(float(cfg.get("noise", {}).get("sigma2", 0.25)))
    n = _pick(args.n, cfg, "n", 50)
    r = cfg["r_list"] if "r_list" in cfg and args.r is None else _pick(args.r, cfg, "r", 5)
    seed = _pick(args.seed, cfg, "seed", 0)
    data = sample_dataset(model, int(n), r, noise, np.random.SeedSequence(seed))
    tio.write_json(tio.dataset_to_dict(data), args.out / "dataset.json")


def cmd_estimate(args) -> None:
    cfg = _config(args)
    data = tio.dataset_from_dict(tio.read_json(args.dataset))
    p = float(_pick(args.p, cfg, "p", 3.0))
    tol = float(_pick(args.tol, cfg, "tol", DEFAULT_TOL))
    eta_arg = _pick(args.eta, cfg, "eta", "theorem")
    k = zonal_green(data.space, p, tol=tol)
    if str(eta_arg) == "theorem":
        c0 = float(_pick(args.c0, cfg, "c0", 1.0))
        eta = theorem_eta(data.n, harmonic_mean(data.r), p, data.space.d, c0)
    else:
        try:
            eta = float(eta_arg)
        except ValueError as exc:
            raise TphcovError(f"--eta must be a number or 'theorem', got {eta_arg!r}") from exc
    est = fit(k, assemble_pairs(data), eta)
    tio.write_json(tio.estimate_to_dict(est), args.out / "estimate.json")
    grid = args.grid if args.grid is not None else cfg.get("grid")
    if grid is not None:
        pts = np.asarray(tio.read_json(grid), dtype=float)
        (args.out / "grid.csv").write_text(tio.grid_csv(predict_grid(est, pts)))


def cmd_rate_study(args) -> None:
    cfg = _config(args)
    if args.seed is not None:
        cfg["seed"] = args.seed
    config = ExperimentConfig.from_dict(cfg)
    report = rate_study(config, threads=args.threads, progress=lambda c: log.debug("done %s", c))
    summary = write_report(report, config, args.out)
    log.info("slope %s (target %.3f, band %s)", summary["slope"], summary["target"], summary["band"])


COMMANDS = {
    "kernel-table": cmd_kernel_table,
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "rate-study": cmd_rate_study,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(message)s")
    try:
        COMMANDS[args.command](args)
    except NumericalError as exc:
        log.error("numerical error: %s", exc)
        return EXIT_NUMERICAL
    except ResourceError as exc:
        log.error("resource cap: %s", exc)
        return EXIT_RESOURCE
    except (TphcovError, KeyError, TypeError, ValueError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
