"""Mie series for a homogeneous sphere (reference solution).

This module deliberately imports nothing from the solver pipeline.

Conventions: ``exp(-i omega t)``; the scattered field behaves as
``exp(ikr)/r * A(xhat)``. For incidence along ``+z`` polarized along ``+x``::

    A = (i/k) [cos(phi) S2(theta) e_theta - sin(phi) S1(theta) e_phi]
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import spherical_jn, spherical_yn

__all__ = [
    "MieSolution",
    "MieTruncationWarning",
    "default_order",
    "mie_solution",
    "mie_far_field",
    "mie_amplitudes",
    "rayleigh_sigma",
    "write_mie_csv",
]


class MieTruncationWarning(UserWarning):
    pass


def default_order(x):
    """Wiscombe-style truncation ``ceil(x + 4 x^(1/3) + 2)``."""
    return int(math.ceil(x + 4.0 * x ** (1.0 / 3.0) + 2.0))


@dataclass(frozen=True)
class MieSolution:
    radius: float
    eps_rel: complex
    k: float
    order: int
    a: np.ndarray
    b: np.ndarray

    @property
    def size_parameter(self):
        return self.k * self.radius

    @property
    def truncated(self):
        """True when ``order`` is below the recommended truncation."""
        return self.order < default_order(self.size_parameter)

    @property
    def sigma_scat(self):
        n = np.arange(1, self.order + 1)
        return 2 * np.pi / self.k ** 2 * np.sum((2 * n + 1) * (np.abs(self.a) ** 2 + np.abs(self.b) ** 2))

    @property
    def sigma_ext(self):
        n = np.arange(1, self.order + 1)
        return 2 * np.pi / self.k ** 2 * np.sum((2 * n + 1) * (self.a + self.b).real)


def mie_solution(radius, eps_rel, k, order=None) -> MieSolution:
    x = k * radius
    m = np.sqrt(complex(eps_rel))
    if m.imag < 0:
        m = -m
    L = default_order(x) if order is None else int(order)
    n = np.arange(1, L + 1)
    mx = m * x
    jx = spherical_jn(n, x)
    djx = spherical_jn(n, x, derivative=True)
    yx = spherical_yn(n, x)
    dyx = spherical_yn(n, x, derivative=True)
    hx = jx + 1j * yx
    dhx = djx + 1j * dyx
    jm = spherical_jn(n, mx)
    djm = spherical_jn(n, mx, derivative=True)
    # Riccati-Bessel derivatives [z f(z)]'
    psi_x = jx + x * djx
    xi_x = hx + x * dhx
    psi_m = jm + mx * djm
    a = (m * m * jm * psi_x - jx * psi_m) / (m * m * jm * xi_x - hx * psi_m)
    b = (jm * psi_x - jx * psi_m) / (jm * xi_x - hx * psi_m)
    if m == 1:
        a = np.zeros(L, dtype=complex)
        b = np.zeros(L, dtype=complex)
    return MieSolution(float(radius), complex(eps_rel), float(k), L, a, b)


def mie_amplitudes(sol: MieSolution, cos_theta):
    """Scattering amplitudes ``S1, S2`` at the given ``cos(theta)`` values."""
    mu = np.atleast_1d(np.asarray(cos_theta, dtype=float))
    S1 = np.zeros(mu.shape, dtype=complex)
    S2 = np.zeros(mu.shape, dtype=complex)
    pi_prev = np.zeros_like(mu)
    pi_n = np.ones_like(mu)
    for n in range(1, sol.order + 1):
        tau_n = n * mu * pi_n - (n + 1) * pi_prev
        f = (2 * n + 1) / (n * (n + 1))
        S1 += f * (sol.a[n - 1] * pi_n + sol.b[n - 1] * tau_n)
        S2 += f * (sol.a[n - 1] * tau_n + sol.b[n - 1] * pi_n)
        pi_next = ((2 * n + 1) * mu * pi_n - (n + 1) * pi_prev) / n
        pi_prev, pi_n = pi_n, pi_next
    return S1, S2


def _frame_amplitude(sol, xhat, d, u):
    v = np.cross(d, u)
    ct = np.clip(xhat @ d, -1.0, 1.0)
    st = np.sqrt(np.maximum(0.0, 1.0 - ct ** 2))
    phi = np.arctan2(xhat @ v, xhat @ u)
    S1, S2 = mie_amplitudes(sol, ct)
    cp, sp_ = np.cos(phi), np.sin(phi)
    e_theta = (ct * cp)[:, None] * u + (ct * sp_)[:, None] * v - st[:, None] * d
    e_phi = -sp_[:, None] * u + cp[:, None] * v
    return (1j / sol.k) * ((cp * S2)[:, None] * e_theta - (sp_ * S1)[:, None] * e_phi)


def mie_far_field(sol: MieSolution, xhat, incident):
    """Far-field amplitude for a plane wave on a sphere centered at the origin.

    ``incident`` needs ``direction``, ``polarization`` and ``amplitude``
    attributes; arbitrary directions and (complex) polarizations are handled
    by rotating the frame and superposing two linear polarizations.
    """
    if sol.truncated:
        warnings.warn(f"Mie order {sol.order} below recommended {default_order(sol.size_parameter)}",
                      MieTruncationWarning, stacklevel=2)
    xhat = np.atleast_2d(np.asarray(xhat, dtype=float))
    xhat = xhat / np.linalg.norm(xhat, axis=-1, keepdims=True)
    d = np.asarray(incident.direction, dtype=float)
    d = d / np.linalg.norm(d)
    e = np.asarray(incident.polarization, dtype=complex)
    e = e / np.linalg.norm(e)
    seed = np.eye(3)[np.argmin(np.abs(d))]
    u1 = seed - (seed @ d) * d
    u1 /= np.linalg.norm(u1)
    u2 = np.cross(d, u1)
    c1 = e @ u1
    c2 = e @ u2
    A = c1 * _frame_amplitude(sol, xhat, d, u1) + c2 * _frame_amplitude(sol, xhat, d, u2)
    return incident.amplitude * A


def rayleigh_sigma(k, radius, eps_rel):
    """Small-sphere cross section ``(8 pi / 3) k^4 a^6 |(eps - 1)/(eps + 2)|^2``."""
    alpha = (eps_rel - 1.0) / (eps_rel + 2.0)
    return 8.0 * np.pi / 3.0 * k ** 4 * radius ** 6 * abs(alpha) ** 2


def write_mie_csv(sol: MieSolution, path, directions, incident):
    """Far-field amplitudes as CSV: ``x, y, z`` of the direction then re/im of ``A_x, A_y, A_z``.

    Numbers carry 9 significant digits.
    """
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    A = mie_far_field(sol, directions, incident)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["x", "y", "z", "re_Ax", "im_Ax", "re_Ay", "im_Ay", "re_Az", "im_Az"])
        for d, a in zip(directions, A):
            row = [format(v, ".9g") for v in d]
            for c in a:
                row += [format(c.real, ".9g"), format(c.imag, ".9g")]
            w.writerow(row)
