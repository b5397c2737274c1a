"""Material parameters, wavenumbers and the incident plane wave.

Time dependence is ``exp(-i omega t)`` throughout, so a conducting body has
``eps' = eps + i sigma / omega`` with a nonnegative imaginary part and the
outgoing free-space kernel is ``exp(ik|x|) / (4 pi |x|)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import epsilon_0 as EPS0, mu_0 as MU0

from .errors import ParameterError

__all__ = [
    "EPS0",
    "MU0",
    "MediumParams",
    "PlaneWave",
    "derive_wavenumbers",
    "incident_field",
    "incident_curl",
]


def _check_finite(**values):
    for name, value in values.items():
        if not np.all(np.isfinite(value)):
            raise ParameterError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class MediumParams:
    """Exterior medium ``(eps0, mu0)`` and homogeneous body ``(eps, sigma, mu0)``.

    Parameters
    ----------
    omega : float
        Angular frequency in rad/s.
    eps0 : float
        Exterior permittivity (F/m).
    mu0 : float
        Permeability, identical inside and outside (H/m).
    eps : float
        Interior permittivity (F/m).
    sigma : float
        Interior conductivity (S/m).
    """

    omega: float
    eps0: float = EPS0
    mu0: float = MU0
    eps: float = EPS0
    sigma: float = 0.0

    def __post_init__(self):
        _check_finite(omega=self.omega, eps0=self.eps0, mu0=self.mu0, eps=self.eps, sigma=self.sigma)
        if self.omega <= 0:
            raise ParameterError("omega must be positive")
        if self.eps0 <= 0 or self.mu0 <= 0:
            raise ParameterError("eps0 and mu0 must be positive")
        if self.sigma < 0:
            raise ParameterError("sigma must be nonnegative")

    @classmethod
    def from_relative(cls, eps_rel, omega, eps0=EPS0, mu0=MU0):
        """Build from a complex relative permittivity ``eps'/eps0``.

        The imaginary part is converted to a conductivity
        ``sigma = Im(eps_rel) * eps0 * omega``.
        """
        eps_rel = complex(eps_rel)
        if eps_rel.imag < 0:
            raise ParameterError("Im(eps_rel) must be nonnegative for exp(-i omega t)")
        return cls(omega=omega, eps0=eps0, mu0=mu0, eps=eps_rel.real * eps0,
                   sigma=eps_rel.imag * eps0 * omega)

    @classmethod
    def from_wavenumber(cls, k, eps_rel=1.0, eps0=EPS0, mu0=MU0):
        """Pick ``omega`` so that the exterior wavenumber equals ``k``."""
        if not k > 0:
            raise ParameterError("k must be positive")
        omega = k / math.sqrt(eps0 * mu0)
        return cls.from_relative(eps_rel, omega, eps0=eps0, mu0=mu0)

    @property
    def eps_prime(self) -> complex:
        return complex(self.eps, self.sigma / self.omega)

    @property
    def eps_rel(self) -> complex:
        return self.eps_prime / self.eps0

    @property
    def k_squared(self) -> float:
        return self.omega ** 2 * self.eps0 * self.mu0

    @property
    def K_squared(self) -> complex:
        return self.omega ** 2 * self.eps_prime * self.mu0

    @property
    def contrast(self) -> complex:
        """``p = K^2 - k^2`` inside the body (zero outside)."""
        return self.K_squared - self.k_squared

    @property
    def gamma(self) -> complex:
        # exact zero when eps == eps0 and sigma == 0
        if self.eps == self.eps0 and self.sigma == 0:
            return 0j
        return self.contrast / self.k_squared

    @property
    def k(self) -> float:
        return math.sqrt(self.k_squared)

    @property
    def K(self) -> complex:
        root = complex(np.sqrt(complex(self.K_squared)))
        if root.imag < 0 or (root.imag == 0 and root.real < 0):
            root = -root
        return root

    @property
    def is_lossless(self) -> bool:
        return self.sigma == 0

    @property
    def zero_contrast(self) -> bool:
        return self.eps == self.eps0 and self.sigma == 0


def derive_wavenumbers(m: MediumParams):
    """Return ``(k, K, gamma)`` for a medium.

    ``k`` is the positive exterior wavenumber, ``K`` the interior one on the
    branch ``Im K >= 0`` and ``gamma = (K^2 - k^2) / k^2``.
    """
    if m.zero_contrast:
        return m.k, complex(m.k), 0j
    return m.k, m.K, m.gamma


@dataclass(frozen=True)
class PlaneWave:
    """Incident plane wave ``amplitude * e * exp(i k d.x)``.

    ``direction`` and ``polarization`` are normalized on construction; a
    polarization that is not transverse to the direction is rejected.
    """

    direction: np.ndarray
    polarization: np.ndarray
    amplitude: complex = 1.0

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float).reshape(3)
        e = np.asarray(self.polarization, dtype=complex).reshape(3)
        _check_finite(direction=d, polarization=e, amplitude=self.amplitude)
        nd = np.linalg.norm(d)
        ne = np.linalg.norm(e)
        if nd == 0 or ne == 0:
            raise ParameterError("direction and polarization must be nonzero")
        d = d / nd
        e = e / ne
        if abs(np.dot(e, d)) > 1e-12:
            raise ParameterError("polarization must be orthogonal to the propagation direction")
        d.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "direction", d)
        object.__setattr__(self, "polarization", e)
        object.__setattr__(self, "amplitude", complex(self.amplitude))

    def scaled(self, factor) -> "PlaneWave":
        return PlaneWave(self.direction, self.polarization, self.amplitude * factor)

    def conjugate(self) -> "PlaneWave":
        """Wave whose field is the complex conjugate of this one at wavenumber ``k``.

        ``conj(a e exp(ik d.x)) = conj(a) conj(e) exp(ik (-d).x)``.
        """
        return PlaneWave(-self.direction, np.conj(self.polarization), np.conj(self.amplitude))


def incident_field(pw: PlaneWave, k, x):
    """Evaluate the incident electric field at positions ``x`` of shape ``(..., 3)``."""
    x = np.asarray(x, dtype=float)
    phase = np.exp(1j * k * (x @ pw.direction))
    return pw.amplitude * phase[..., None] * pw.polarization


def incident_curl(pw: PlaneWave, k, x):
    """Curl of the incident electric field, ``i k (d x e) E0``."""
    x = np.asarray(x, dtype=float)
    phase = np.exp(1j * k * (x @ pw.direction))
    return (1j * k * pw.amplitude) * phase[..., None] * np.cross(pw.direction, pw.polarization)
