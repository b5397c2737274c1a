"""Free-space Green's functions for the operator ``curl curl - k^2``.

All functions accept displacements of shape ``(..., 3)`` and broadcast.

With ``g = exp(ikr) / (4 pi r)`` and ``g' = g (ik - 1/r)`` the second
derivatives are::

    d_i d_j g = g [ (ik/r - 1/r^2) delta_ij + (3/r^2 - 3ik/r - k^2) xh_i xh_j ]

so the dyadic kernel ``G = g I + (1/k^2) grad grad g`` reads::

    G = g [ (1 + (ikr - 1)/(kr)^2) I + ((3 - 3ikr - (kr)^2)/(kr)^2) xh xh ]
"""
import numpy as np

from .errors import ParameterError, SingularityError

__all__ = [
    "scalar_green",
    "grad_scalar_green",
    "hessian_scalar_green",
    "green_tensor",
    "green_tensor_fourier",
]

FOUR_PI = 4.0 * np.pi


def _radius(x):
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    if np.any(r == 0):
        raise SingularityError("kernel evaluated at zero displacement; use the singular quadrature")
    return x, r


def scalar_green(x, k):
    """``exp(ik|x|) / (4 pi |x|)``."""
    x, r = _radius(x)
    return np.exp(1j * k * r) / (FOUR_PI * r)


def grad_scalar_green(x, k):
    """Gradient of :func:`scalar_green` with respect to ``x``."""
    x, r = _radius(x)
    g = np.exp(1j * k * r) / (FOUR_PI * r)
    return (g * (1j * k - 1.0 / r) / r)[..., None] * x


def hessian_scalar_green(x, k):
    """Matrix of second derivatives ``d_i d_j g``, shape ``(..., 3, 3)``."""
    x, r = _radius(x)
    g = np.exp(1j * k * r) / (FOUR_PI * r)
    xh = x / r[..., None]
    a = g * (1j * k / r - 1.0 / r ** 2)
    b = g * (3.0 / r ** 2 - 3j * k / r - k ** 2)
    return a[..., None, None] * np.eye(3) + b[..., None, None] * (xh[..., :, None] * xh[..., None, :])


def green_tensor(x, k):
    """Dyadic Green's tensor ``g I + grad grad g / k^2``, shape ``(..., 3, 3)``."""
    if not k > 0:
        raise ParameterError("green_tensor needs k > 0")
    x, r = _radius(x)
    kr = k * r
    g = np.exp(1j * kr) / (FOUR_PI * r)
    xh = x / r[..., None]
    a = g * (1.0 + (1j * kr - 1.0) / kr ** 2)
    b = g * (3.0 - 3j * kr - kr ** 2) / kr ** 2
    return a[..., None, None] * np.eye(3) + b[..., None, None] * (xh[..., :, None] * xh[..., None, :])


def green_tensor_fourier(xi, k):
    """Fourier-space kernel with the ``(2 pi)^-3`` normalization of ``G(x) = int exp(i xi.x) G~(xi) dxi``."""
    if not k > 0:
        raise ParameterError("green_tensor_fourier needs k > 0")
    xi = np.asarray(xi, dtype=float)
    xi2 = np.sum(xi * xi, axis=-1)
    denom = xi2 - k * k
    if np.any(denom == 0):
        raise ParameterError("resonant denominator |xi|^2 = k^2")
    c = 1.0 / ((2 * np.pi) ** 3 * denom)
    outer = xi[..., :, None] * xi[..., None, :]
    return c[..., None, None] * (np.eye(3) - outer / (k * k))
