"""Configuration-driven pipeline: voxelize, build the basis, assemble, solve, post-process."""
from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .assembly import assemble, build_basis, dump_system
from .config import ExperimentConfig
from .errors import ConfigError
from .geometry import box, ellipsoid, sphere, voxelize
from .io import write_far_field_csv, write_json, write_probe_csv
from .medium import EPS0, MU0, MediumParams, PlaneWave
from .postprocess import (FieldSolution, boundary_diagnostic, cross_sections, eval_field, far_field,
                          radiation_check, sphere_rule)
from .quadrature import QuadratureRule
from .solver import solve

log = logging.getLogger(__name__)

__all__ = ["ExperimentResult", "build_shape", "build_medium", "build_incident", "grid_spacing",
           "run_experiment", "write_outputs", "convergence_study"]


def build_shape(cfg: ExperimentConfig):
    if cfg.shape == "sphere":
        return sphere(cfg.radius, cfg.center)
    if cfg.shape == "ellipsoid":
        return ellipsoid(cfg.semi_axes, cfg.center)
    return box(cfg.lo, cfg.hi)


def build_medium(cfg: ExperimentConfig) -> MediumParams:
    if cfg.k is not None:
        if cfg.eps_rel is not None:
            return MediumParams.from_wavenumber(cfg.k, cfg.eps_rel)
        omega = cfg.k / math.sqrt(EPS0 * MU0)
        return MediumParams(omega, eps=cfg.eps, sigma=cfg.sigma)
    if cfg.eps_rel is not None:
        return MediumParams.from_relative(cfg.eps_rel, cfg.omega)
    return MediumParams(cfg.omega, eps=cfg.eps, sigma=cfg.sigma)


def build_incident(cfg: ExperimentConfig) -> PlaneWave:
    return PlaneWave(cfg.direction, cfg.polarization, cfg.amplitude)


def grid_spacing(cfg: ExperimentConfig, shape=None) -> float:
    """``h`` from the config; ``cells_per_diameter`` is relative to the longest bounding-box edge."""
    if cfg.h is not None:
        return cfg.h
    shape = build_shape(cfg) if shape is None else shape
    return shape.width / cfg.cells_per_diameter


def quadrature_rule(cfg: ExperimentConfig) -> QuadratureRule:
    return QuadratureRule(cfg.quad_order, cfg.near_order, singular_order=cfg.singular_order)


def probe_points(cfg: ExperimentConfig, shape):
    pts = [np.asarray(p, dtype=float) for p in cfg.probes]
    if cfg.random_probes > 0:
        rng = np.random.default_rng(cfg.seed)
        radius = cfg.probe_radius if cfg.probe_radius is not None else 2.0 * shape.width
        d = rng.normal(size=(cfg.random_probes, 3))
        d /= np.linalg.norm(d, axis=-1, keepdims=True)
        pts.extend(shape.center + radius * d)
    return np.array(pts).reshape(-1, 3)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    solution: FieldSolution
    sigma_scat: float
    optical_theorem: float
    cross_label: str
    theta: np.ndarray
    phi: np.ndarray
    amplitude: np.ndarray
    weights: np.ndarray
    probes: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    probe_field: np.ndarray = field(default_factory=lambda: np.zeros((0, 3), complex))
    probe_flags: np.ndarray = field(default_factory=lambda: np.zeros(0, bool))
    diagnostics: dict = field(default_factory=dict)

    @property
    def M(self):
        return self.solution.basis.M

    def summary(self) -> dict:
        rep = self.solution.report
        grid = self.solution.grid
        out = {
            "M": self.M,
            "h": grid.h,
            "unknowns": 3 * self.M,
            "solver": rep.method,
            "iterations": rep.iterations,
            "relative_residual": rep.relative_residual,
            "solve_seconds": rep.elapsed,
            "sigma_scat": self.sigma_scat,
            "optical_theorem": self.optical_theorem,
            "optical_theorem_label": self.cross_label,
            "k": self.solution.k,
            "eps_rel": self.solution.medium.eps_rel,
        }
        out.update(self.diagnostics)
        return out

    def summary_line(self) -> str:
        rep = self.solution.report
        return (f"M={self.M} solver={rep.method} residual={rep.relative_residual:.3e} "
                f"sigmaScat={self.sigma_scat:.9g}")


def run_experiment(cfg: ExperimentConfig, h=None) -> ExperimentResult:
    """Run one experiment; ``h`` overrides the configured spacing."""
    shape = build_shape(cfg)
    medium = build_medium(cfg)
    incident = build_incident(cfg)
    rule = quadrature_rule(cfg)
    spacing = grid_spacing(cfg, shape) if h is None else float(h)
    grid = voxelize(shape, spacing, node_rule=cfg.node_rule)
    basis = build_basis(grid)
    system = assemble(grid, basis, medium, incident, rule)
    c, report = solve(system, cfg.solver, tol=cfg.tol, max_iter=cfg.max_iter, dense_cap=cfg.dense_cap,
                      preconditioner=None if cfg.preconditioner == "none" else cfg.preconditioner)
    sol = FieldSolution(c, system, report, rule)

    srule = sphere_rule(cfg.n_theta, cfg.n_phi)
    amp = far_field(sol, srule.directions).amplitude
    if abs(abs(incident.amplitude) - 1.0) <= 1e-12:
        cs = cross_sections(sol, srule)
        sigma, ot, label = cs.sigma_scat, cs.optical_theorem, cs.label
    else:
        sigma = float(np.sum(srule.weights * np.sum(np.abs(amp) ** 2, axis=-1)))
        ot, label = float("nan"), "not computed (incident amplitude is not 1)"
    result = ExperimentResult(cfg, sol, sigma, ot, label, srule.theta, srule.phi, amp, srule.weights)

    pts = probe_points(cfg, shape)
    if len(pts):
        E, flags = eval_field(sol, pts, with_flags=True)
        result.probes, result.probe_field, result.probe_flags = pts, E, flags

    if cfg.radiation_check:
        R = 10.0 * shape.width + 10.0 / medium.k
        rc = radiation_check(sol, srule.directions[:: max(1, len(srule.directions) // 8)], R * np.array([1, 2, 4, 8]))
        result.diagnostics["radiation_slope"] = rc["slope"]
        result.diagnostics["radiation_residual_times_r"] = rc["residual_times_r"].mean(axis=1)
    if cfg.boundary_diagnostic:
        bd = boundary_diagnostic(sol, cfg.boundary_samples)
        result.diagnostics["boundary_tangential"] = bd["tangential"]
        result.diagnostics["boundary_normal"] = bd["normal"]
    return result


def write_outputs(result: ExperimentResult, outdir=None):
    cfg = result.config
    outdir = cfg.output_dir if outdir is None else outdir
    os.makedirs(outdir, exist_ok=True)
    write_far_field_csv(os.path.join(outdir, "far_field.csv"), result.theta, result.phi, result.amplitude)
    if len(result.probes):
        write_probe_csv(os.path.join(outdir, "probes.csv"), result.probes, result.probe_field, result.probe_flags)
    write_json(os.path.join(outdir, "summary.json"), result.summary())
    if cfg.dump_system:
        dump_system(result.solution.system, os.path.join(outdir, "system.bin"))


def convergence_study(cfg: ExperimentConfig, levels, as_cells_per_diameter=False) -> dict:
    """Run the experiment at each refinement level (coarse to fine).

    Reports ``sigmaScat`` and ``M`` per level, the far-field L2 difference
    between consecutive levels over the configured angular grid, empirical
    orders ``log(d_i / d_{i+1}) / log(h_i / h_{i+1})`` and whether the
    differences decrease monotonically.
    """
    if len(levels) < 3:
        raise ConfigError("a convergence study needs at least three levels")
    shape = build_shape(cfg)
    hs = [shape.width / v if as_cells_per_diameter else float(v) for v in levels]
    if any(b >= a for a, b in zip(hs, hs[1:])):
        raise ConfigError("levels must refine (decreasing h)")
    results = [run_experiment(cfg, h) for h in hs]
    diffs = []
    for a, b in zip(results, results[1:]):
        d = np.sum(b.weights * np.sum(np.abs(b.amplitude - a.amplitude) ** 2, axis=-1))
        diffs.append(float(np.sqrt(d)))
    orders = []
    for i in range(len(diffs) - 1):
        if diffs[i] > 0 and diffs[i + 1] > 0:
            orders.append(float(np.log(diffs[i] / diffs[i + 1]) / np.log(hs[i] / hs[i + 1])))
        else:
            orders.append(float("nan"))
    return {
        "h": hs,
        "M": [r.M for r in results],
        "sigma_scat": [r.sigma_scat for r in results],
        "far_field_difference": diffs,
        "empirical_order": orders,
        "monotone_decrease": bool(all(b < a for a, b in zip(diffs, diffs[1:]))),
        "results": results,
    }
