"""Strict flat ``key = value`` experiment configuration.

One assignment per line; ``#`` starts a comment. Vectors are written as
whitespace- or comma-separated numbers, complex numbers in Python syntax
(``2+0.1j``). Every key must be listed in :data:`SCHEMA`; anything else
is rejected so a typo cannot silently change the physics.

Example::

    shape = sphere
    radius = 0.5
    eps_rel = 2.0
    k = 1.0
    cells_per_diameter = 16
    direction = 0 0 1
    polarization = 1 0 0
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Optional, Tuple

import numpy as np

from .errors import ConfigError

__all__ = ["ExperimentConfig", "SCHEMA", "parse_config", "load_config"]


def _float(v):
    return float(v)


def _int(v):
    return int(v)


def _complex(v):
    return complex(v.replace(" ", ""))


def _bool(v):
    low = v.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _vector(conv, n=3):
    def parse(v):
        parts = v.replace(",", " ").split()
        if len(parts) != n:
            raise ValueError(f"expected {n} numbers, got {len(parts)}")
        return tuple(conv(p) for p in parts)

    return parse


def _points(v):
    pts = []
    for chunk in v.split(";"):
        if chunk.strip():
            pts.append(_vector(float)(chunk))
    return tuple(pts)


def _choice(*options):
    def parse(v):
        if v not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return v

    return parse


# key -> (parser, description)
SCHEMA = {
    "shape": (_choice("sphere", "ellipsoid", "box"), "scatterer kind"),
    "radius": (_float, "sphere radius"),
    "semi_axes": (_vector(float), "ellipsoid semi-axes"),
    "center": (_vector(float), "sphere/ellipsoid center"),
    "lo": (_vector(float), "box lower corner"),
    "hi": (_vector(float), "box upper corner"),
    "eps_rel": (_complex, "relative permittivity (complex allowed)"),
    "eps": (_float, "absolute permittivity (with sigma)"),
    "sigma": (_float, "conductivity"),
    "omega": (_float, "angular frequency"),
    "k": (_float, "exterior wavenumber (alternative to omega)"),
    "h": (_float, "grid spacing"),
    "cells_per_diameter": (_float, "grid spacing as diameter / h"),
    "node_rule": (_choice("cells", "inside"), "which grid nodes carry hats"),
    "direction": (_vector(float), "incident propagation direction"),
    "polarization": (_vector(_complex), "incident polarization"),
    "amplitude": (_complex, "incident amplitude"),
    "solver": (_choice("auto", "dense", "iterative"), "solution method"),
    "tol": (_float, "iterative relative residual target"),
    "max_iter": (_int, "iteration cap"),
    "dense_cap": (_int, "largest 3M solved densely"),
    "preconditioner": (_choice("none", "gram"), "GMRES preconditioner"),
    "quad_order": (_int, "far-cell Gauss order"),
    "near_order": (_int, "near-cell Gauss order"),
    "singular_order": (_int, "Duffy pyramid order"),
    "n_theta": (_int, "far-field polar nodes (Gauss-Legendre in cos theta)"),
    "n_phi": (_int, "far-field azimuthal nodes"),
    "probes": (_points, "probe points 'x y z; x y z; ...'"),
    "random_probes": (_int, "number of random exterior probe points"),
    "probe_radius": (_float, "radius of the random probes"),
    "boundary_diagnostic": (_bool, "run the interface diagnostic"),
    "boundary_samples": (_int, "surface samples for the diagnostic"),
    "radiation_check": (_bool, "run the radiation-condition check"),
    "dump_system": (_bool, "write the dense system to system.bin"),
    "output_dir": (str, "directory for output files"),
    "seed": (_int, "seed for randomized sampling"),
}


@dataclass(frozen=True)
class ExperimentConfig:
    shape: str = "sphere"
    radius: Optional[float] = None
    semi_axes: Optional[Tuple[float, float, float]] = None
    center: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    lo: Optional[Tuple[float, float, float]] = None
    hi: Optional[Tuple[float, float, float]] = None
    eps_rel: Optional[complex] = None
    eps: Optional[float] = None
    sigma: float = 0.0
    omega: Optional[float] = None
    k: Optional[float] = None
    h: Optional[float] = None
    cells_per_diameter: Optional[float] = None
    node_rule: str = "cells"
    direction: Tuple[float, float, float] = (0.0, 0.0, 1.0)
    polarization: Tuple[complex, complex, complex] = (1.0, 0.0, 0.0)
    amplitude: complex = 1.0
    solver: str = "auto"
    tol: float = 1e-8
    max_iter: int = 500
    dense_cap: int = 6000
    preconditioner: str = "none"
    quad_order: int = 3
    near_order: int = 5
    singular_order: int = 8
    n_theta: int = 24
    n_phi: int = 48
    probes: tuple = ()
    random_probes: int = 0
    probe_radius: Optional[float] = None
    boundary_diagnostic: bool = False
    boundary_samples: int = 64
    radiation_check: bool = False
    dump_system: bool = False
    output_dir: str = "."
    seed: int = 0

    def __post_init__(self):
        need = {"sphere": ["radius"], "ellipsoid": ["semi_axes"], "box": ["lo", "hi"]}[self.shape]
        for key in need:
            if getattr(self, key) is None:
                raise ConfigError(f"shape {self.shape!r} requires {key!r}")
        if (self.omega is None) == (self.k is None):
            raise ConfigError("exactly one of 'omega' and 'k' must be given")
        if (self.eps_rel is None) == (self.eps is None):
            raise ConfigError("exactly one of 'eps_rel' and 'eps' must be given")
        if self.eps_rel is not None and self.sigma != 0.0:
            raise ConfigError("'sigma' goes with 'eps'; fold it into a complex 'eps_rel' instead")
        if (self.h is None) == (self.cells_per_diameter is None):
            raise ConfigError("exactly one of 'h' and 'cells_per_diameter' must be given")
        if self.n_theta < 1 or self.n_phi < 1:
            raise ConfigError("n_theta and n_phi must be positive")

    def replace(self, **changes) -> "ExperimentConfig":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return ExperimentConfig(**values)


def parse_config(text: str) -> ExperimentConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = SCHEMA[key][0](value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value {value!r} for {key!r}: {exc}") from None
    return ExperimentConfig(**values)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as f:
            text = f.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
