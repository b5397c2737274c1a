"""Command-line driver.

    python -m vie3d run experiment.cfg
    python -m vie3d converge experiment.cfg --levels 8 12 16 --cpd
    python -m vie3d mie experiment.cfg

Exit codes: 0 success, 1 configuration or parameter error, 2 iterative
solver non-convergence. ``VIE3D_THREADS`` sets the FFT worker count.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from .config import load_config
from .errors import NonConvergenceError, VIEError
from .experiment import build_incident, build_medium, build_shape, convergence_study, run_experiment, write_outputs
from .io import write_far_field_csv, write_json
from .oracles.mie import mie_far_field, mie_solution
from .postprocess import sphere_rule

log = logging.getLogger("vie3d")


def cmd_run(args):
    cfg = load_config(args.config)
    result = run_experiment(cfg)
    write_outputs(result, args.output)
    print(result.summary_line())
    return 0


def cmd_converge(args):
    cfg = load_config(args.config)
    report = convergence_study(cfg, args.levels, as_cells_per_diameter=args.cpd)
    outdir = args.output or cfg.output_dir
    os.makedirs(outdir, exist_ok=True)
    data = {key: val for key, val in report.items() if key != "results"}
    write_json(os.path.join(outdir, "convergence.json"), data)
    for h, M, s in zip(report["h"], report["M"], report["sigma_scat"]):
        print(f"h={h:.6g} M={M} sigmaScat={s:.9g}")
    print("far-field differences: " + " ".join(f"{d:.3e}" for d in report["far_field_difference"])
          + f" monotone={report['monotone_decrease']}")
    return 0


def cmd_mie(args):
    cfg = load_config(args.config)
    if cfg.shape != "sphere":
        raise VIEError("the Mie oracle needs a sphere")
    if np.any(np.asarray(cfg.center) != 0):
        raise VIEError("the Mie oracle needs a sphere centered at the origin")
    medium = build_medium(cfg)
    pw = build_incident(cfg)
    sol = mie_solution(cfg.radius, medium.eps_rel, medium.k)
    rule = sphere_rule(cfg.n_theta, cfg.n_phi)
    A = mie_far_field(sol, rule.directions, pw)
    outdir = args.output or cfg.output_dir
    os.makedirs(outdir, exist_ok=True)
    write_far_field_csv(os.path.join(outdir, "mie_far_field.csv"), rule.theta, rule.phi, A)
    scale = abs(pw.amplitude) ** 2
    write_json(os.path.join(outdir, "mie_summary.json"),
               {"order": sol.order, "size_parameter": sol.size_parameter,
                "sigma_scat": scale * sol.sigma_scat, "sigma_ext": scale * sol.sigma_ext})
    print(f"Mie order={sol.order} ka={sol.size_parameter:.6g} sigmaScat={scale * sol.sigma_scat:.9g}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="vie3d", description="Volume integral equation scattering solver")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run one experiment")
    p.add_argument("config")
    p.add_argument("-o", "--output", help="output directory (overrides output_dir)")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("converge", help="refinement study")
    p.add_argument("config")
    p.add_argument("--levels", type=float, nargs="+", required=True, help="grid spacings, coarse to fine")
    p.add_argument("--cpd", action="store_true", help="read --levels as cells per diameter")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_converge)
    p = sub.add_parser("mie", help="Mie-series reference only")
    p.add_argument("config")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_mie)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (VIEError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
