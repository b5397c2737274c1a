"""Fields, far-field amplitudes, cross sections and diagnostics from a solved system.

The reconstructed interior field ``E_h = sum_m c_m phi_m`` vanishes on the
boundary of the hat supports, so for the scattered field

    V(x) = p int g(x - y) E_h(y) dy + gamma int grad_x g(x - y) div E_h(y) dy

(the outer gradient moved onto ``E_h``). Both kernels are at most ``1/r^2``
singular, which keeps exterior evaluation close to the body well defined.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ParameterError
from .kernels import FOUR_PI
from .medium import incident_curl, incident_field
from .quadrature import QuadratureRule, gauss_legendre, singular_box_rule, _tensor_gauss

log = logging.getLogger(__name__)

__all__ = [
    "FieldSolution",
    "FarFieldSample",
    "CrossSections",
    "SphereRule",
    "sphere_rule",
    "eval_field",
    "eval_scattered",
    "eval_H",
    "far_field",
    "cross_sections",
    "radiation_check",
    "boundary_diagnostic",
    "boundary_layer_mask",
]

_CORNERS = np.array(list(np.ndindex(2, 2, 2)))


@dataclass
class FieldSolution:
    """Solved coefficients together with the system that produced them."""

    coefficients: np.ndarray
    system: object
    report: Optional[object] = None
    rule: QuadratureRule = QuadratureRule()
    _sources: Optional[tuple] = field(default=None, repr=False)

    @property
    def grid(self):
        return self.system.grid

    @property
    def basis(self):
        return self.system.basis

    @property
    def medium(self):
        return self.system.medium

    @property
    def incident(self):
        return self.system.incident

    @property
    def k(self):
        return self.medium.k

    @property
    def contrast(self):
        return 0j if self.medium.zero_contrast else self.medium.contrast

    @property
    def c(self):
        return np.asarray(self.coefficients).reshape(3, -1)

    @property
    def moments(self):
        """Moments ``int E_i phi_m dx`` of the reconstruction (``Gram @ c`` per component)."""
        return np.stack([self.basis.gram @ ci for ci in self.c])

    # -- reconstruction -----------------------------------------------------

    def _node_grid(self):
        grid = self.grid
        C = np.zeros((3,) + tuple(d + 1 for d in grid.dims), dtype=complex)
        n = grid.interior_nodes
        C[:, n[:, 0], n[:, 1], n[:, 2]] = self.c
        return C

    def cell_fields(self, cells, local):
        """``E_h`` and ``div E_h`` at local coordinates ``local`` (in ``[0,1]^3``) of ``cells``.

        ``cells`` has shape ``(N, 3)`` and ``local`` ``(N, P, 3)``; returns
        arrays of shape ``(N, P, 3)`` and ``(N, P)``.
        """
        C = self._node_grid()
        h = self.grid.h
        E = np.zeros(local.shape[:2] + (3,), dtype=complex)
        div = np.zeros(local.shape[:2], dtype=complex)
        for o in _CORNERS:
            node = cells + o
            vals = C[:, node[:, 0], node[:, 1], node[:, 2]].T  # (N, 3)
            f = np.where(o == 1, local, 1.0 - local)  # (N, P, 3)
            w = f[..., 0] * f[..., 1] * f[..., 2]
            E += w[..., None] * vals[:, None, :]
            for a in range(3):
                df = np.where(o[a] == 1, 1.0, -1.0) / h
                others = [f[..., b] for b in range(3) if b != a]
                div += df * others[0] * others[1] * vals[:, None, a]
        return E, div

    def interior_field(self, x):
        """Basis reconstruction ``sum_m c_m phi_m(x)``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        P = self.basis.evaluate(x)
        return np.stack([P @ ci for ci in self.c], axis=-1)

    def sources(self):
        """Cached far-field quadrature of the support cells: points, weights, E, div E, cell ids."""
        if self._sources is None:
            grid = self.grid
            cells = grid.support_cells()
            ref, w = _tensor_gauss(self.rule.order)
            local = np.broadcast_to(ref, (len(cells),) + ref.shape)
            E, div = self.cell_fields(cells, local)
            pts = grid.origin + grid.h * (cells[:, None, :] + local)
            n = len(cells) * len(ref)
            self._sources = (pts.reshape(n, 3), np.tile(w * grid.h ** 3, len(cells)),
                             E.reshape(n, 3), div.reshape(n), np.repeat(np.arange(len(cells)), len(ref)),
                             cells)
        return self._sources


def _kernels(x, y, k):
    d = x - y
    r = np.linalg.norm(d, axis=-1)
    g = np.exp(1j * k * r) / (FOUR_PI * r)
    dg = (g * (1j * k - 1.0 / r) / r)[..., None] * d
    return g, dg


def _accumulate(sol, x, pts, wts, E, div, curl):
    g, dg = _kernels(x[None, :], pts, sol.k)
    p = sol.contrast
    gamma = p / sol.k ** 2
    if curl:
        return p * np.sum(wts[:, None] * np.cross(dg, E), axis=0)
    return p * (wts * g) @ E + gamma * (wts * div) @ dg


def _scattered(sol, x, curl=False):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    out = np.zeros((len(x), 3), dtype=complex)
    if sol.contrast == 0:
        return out
    pts, wts, E, div, cid, cells = sol.sources()
    grid = sol.grid
    h = grid.h
    lo = grid.origin + h * cells
    radius = sol.rule.near_field_radius * h
    for n, xi in enumerate(x):
        dist = np.linalg.norm(np.maximum(np.maximum(lo - xi, 0.0), xi - (lo + h)), axis=-1)
        near = np.flatnonzero(dist < radius)
        if len(near) == 0:
            out[n] = _accumulate(sol, xi, pts, wts, E, div, curl)
            continue
        keep = ~np.isin(cid, near)
        acc = _accumulate(sol, xi, pts[keep], wts[keep], E[keep], div[keep], curl)
        for c in near:
            P, W = singular_box_rule(lo[c], lo[c] + h, xi, sol.rule.near_order + 1)
            local = ((P - lo[c]) / h)[None]
            Ec, dc = sol.cell_fields(cells[c][None], local)
            acc = acc + _accumulate(sol, xi, P, W, Ec[0], dc[0], curl)
        out[n] = acc
    return out


def boundary_layer_mask(sol, x):
    """True where a point lies within one cell of the surface (inside status changes within ``h``)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    shape = sol.grid.shape
    base = shape.contains(x)
    flag = np.zeros(len(x), dtype=bool)
    for a in range(3):
        for s in (-1.0, 1.0):
            off = np.zeros(3)
            off[a] = s * sol.grid.h
            flag |= shape.contains(x + off) != base
    return flag


def eval_scattered(sol, x):
    """Scattered field ``V`` of the discrete polarization at arbitrary points."""
    return _scattered(sol, x)


def eval_field(sol, x, with_flags=False):
    """Total electric field.

    Interior points use the basis reconstruction, exterior points
    ``E0 + V``. With ``with_flags`` a boolean boundary-layer mask is
    returned alongside.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    inside = sol.grid.shape.contains(x)
    out = np.empty((len(x), 3), dtype=complex)
    if np.any(inside):
        out[inside] = sol.interior_field(x[inside])
    if np.any(~inside):
        xe = x[~inside]
        out[~inside] = incident_field(sol.incident, sol.k, xe) + _scattered(sol, xe)
    flags = boundary_layer_mask(sol, x)
    if np.any(flags) and not with_flags:
        log.warning("%d evaluation point(s) within one cell of the surface", int(flags.sum()))
    return (out, flags) if with_flags else out


def eval_H(sol, x):
    """Magnetic field ``curl E / (i omega mu0)`` at exterior points."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if np.any(sol.grid.shape.contains(x)):
        raise ParameterError("eval_H is only available outside the scatterer")
    curl = incident_curl(sol.incident, sol.k, x) + _scattered(sol, x, curl=True)
    m = sol.medium
    return curl / (1j * m.omega * m.mu0)


# -- far field --------------------------------------------------------------


@dataclass(frozen=True)
class FarFieldSample:
    """``V(r xhat) ~ exp(ikr)/r * amplitude`` for each direction."""

    direction: np.ndarray
    amplitude: np.ndarray


def _hat_transform(sol, q):
    """``int exp(-i q.y) phi_m(y) dy`` for wave vectors ``q`` (shape ``(N, 3)``) -> ``(N, M)``."""
    h = sol.grid.h
    nodes = sol.grid.node_positions()
    envelope = np.prod(h * np.sinc(q * h / (2 * np.pi)) ** 2, axis=-1)
    return np.exp(-1j * q @ nodes.T) * envelope[:, None]


def far_field(sol, xhat):
    """``A(xhat) = (1/4 pi) (I - xhat xhat) int exp(-ik xhat.y) p E_h(y) dy`` (exact for hats)."""
    xhat = np.atleast_2d(np.asarray(xhat, dtype=float))
    norms = np.linalg.norm(xhat, axis=-1)
    if np.any(np.abs(norms - 1.0) > 1e-9):
        raise ParameterError("far-field directions must be unit vectors")
    if sol.contrast == 0:
        return FarFieldSample(xhat, np.zeros((len(xhat), 3), dtype=complex))
    F = _hat_transform(sol, sol.k * xhat)
    J = sol.contrast * (F @ sol.c.T)
    A = (J - np.sum(J * xhat, axis=-1, keepdims=True) * xhat) / FOUR_PI
    return FarFieldSample(xhat, A)


@dataclass(frozen=True)
class SphereRule:
    """Directions and weights on the unit sphere (weights sum to ``4 pi``)."""

    directions: np.ndarray
    weights: np.ndarray
    theta: np.ndarray
    phi: np.ndarray


def sphere_rule(n_theta=24, n_phi=48) -> SphereRule:
    """Gauss-Legendre in ``cos(theta)`` times the trapezoid rule in ``phi``."""
    x, w = gauss_legendre(n_theta)
    ct = 2.0 * x - 1.0
    wt = 2.0 * w
    ph = 2 * np.pi * np.arange(n_phi) / n_phi
    CT, PH = np.meshgrid(ct, ph, indexing="ij")
    ST = np.sqrt(1.0 - CT ** 2)
    dirs = np.stack([ST * np.cos(PH), ST * np.sin(PH), CT], axis=-1).reshape(-1, 3)
    weights = (wt[:, None] * np.full(n_phi, 2 * np.pi / n_phi)).reshape(-1)
    return SphereRule(dirs, weights, np.arccos(CT).reshape(-1), PH.reshape(-1))


@dataclass(frozen=True)
class CrossSections:
    sigma_scat: float
    optical_theorem: float
    label: str


def cross_sections(sol, rule: Optional[SphereRule] = None) -> CrossSections:
    """Scattering cross section and the forward-amplitude (optical theorem) value.

    For a lossy body the second number is the extinction cross section,
    which is labelled accordingly.
    """
    pw = sol.incident
    if pw is None or abs(abs(pw.amplitude) - 1.0) > 1e-12:
        raise ParameterError("cross sections need a unit-amplitude plane wave")
    rule = sphere_rule() if rule is None else rule
    A = far_field(sol, rule.directions).amplitude
    sigma = float(np.sum(rule.weights * np.sum(np.abs(A) ** 2, axis=-1)))
    fwd = far_field(sol, pw.direction[None, :]).amplitude[0]
    ot = float(4 * np.pi / sol.k * np.imag(np.conj(pw.polarization * pw.amplitude) @ fwd))
    label = "scattering" if sol.medium.is_lossless else "extinction, not scattering"
    return CrossSections(sigma, ot, label)


def radiation_check(sol, directions, radii, step=None):
    """Table of ``|dV/dr - ik V| * r`` and the log-log slope of ``|dV/dr - ik V|`` against ``r``.

    The radial derivative is a central difference with step ``1e-3 / k``.
    """
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    directions = directions / np.linalg.norm(directions, axis=-1, keepdims=True)
    radii = np.asarray(radii, dtype=float)
    if np.any(np.diff(radii) <= 0):
        raise ParameterError("radii must be increasing")
    k = sol.k
    dr = 1e-3 / k if step is None else step
    table = np.zeros((len(radii), len(directions)))
    raw = np.zeros_like(table)
    for i, r in enumerate(radii):
        pts = r * directions
        V = _scattered(sol, pts)
        Vp = _scattered(sol, (r + dr) * directions)
        Vm = _scattered(sol, (r - dr) * directions)
        res = np.linalg.norm((Vp - Vm) / (2 * dr) - 1j * k * V, axis=-1)
        raw[i] = res
        table[i] = res * r
    mean = raw.mean(axis=1)
    if np.all(mean > 0):
        slope = float(np.polyfit(np.log(radii), np.log(mean), 1)[0])
    else:
        slope = -np.inf
    return {"radii": radii, "residual_times_r": table, "slope": slope}


def boundary_diagnostic(sol, n_samples=64, offset=None):
    """Interface mismatches for sample pairs straddling the surface at ``+-offset`` along the normal.

    Returns mean tangential and normal mismatches relative to the local
    field magnitude, plus the per-sample table.
    """
    shape = sol.grid.shape
    if shape is None or shape.surface is None:
        raise ParameterError("shape provides no surface samples")
    delta = 0.5 * sol.grid.h if offset is None else offset
    pts, nrm = shape.surface(n_samples)
    inner = pts - delta * nrm
    outer = pts + delta * nrm
    Ep = sol.interior_field(inner)
    Em = incident_field(sol.incident, sol.k, outer) + _scattered(sol, outer)
    scale = np.maximum(np.linalg.norm(Em, axis=-1), 1e-300)
    tang = np.linalg.norm(np.cross(nrm, Ep) - np.cross(nrm, Em), axis=-1) / scale
    eps_rel = sol.medium.eps_rel
    normal = np.abs(eps_rel * np.sum(nrm * Ep, axis=-1) - np.sum(nrm * Em, axis=-1)) / scale
    return {
        "tangential": float(np.mean(tang)),
        "normal": float(np.mean(normal)),
        "points": pts,
        "tangential_samples": tang,
        "normal_samples": normal,
    }
