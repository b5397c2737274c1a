"""Finite-difference residual of ``curl curl E - k^2 E = p E``.

``curl curl E = grad div E - lap E`` with second-order central differences
of step ``s``: the 7-point Laplacian and the 4-point cross stencil
``(f(+,+) - f(+,-) - f(-,+) + f(-,-)) / (4 s^2)`` for mixed derivatives.
The truncation error is ``O(k^2 s^2)`` relative and round-off grows like
``eps / (k s)^2``, so ``s = 1e-3 / k`` is the default.
"""
from __future__ import annotations

import numpy as np

from ..errors import ParameterError

__all__ = ["curl_curl", "helmholtz_residual"]


def curl_curl(field_fn, x, step):
    """Finite-difference ``curl curl`` of ``field_fn`` at a single point ``x``."""
    x = np.asarray(x, dtype=float)
    s = float(step)
    if not s > 0 or not np.isfinite(s) or s < 1e-10 * max(1.0, np.abs(x).max()):
        raise ParameterError(f"finite-difference step {step!r} underflows")
    eye = np.eye(3) * s
    offsets = [np.zeros(3)]
    for a in range(3):
        offsets += [eye[a], -eye[a]]
    for a in range(3):
        for b in range(a + 1, 3):
            for sa in (1, -1):
                for sb in (1, -1):
                    offsets.append(sa * eye[a] + sb * eye[b])
    vals = np.asarray(field_fn(x[None, :] + np.array(offsets)), dtype=complex).reshape(len(offsets), 3)
    f0 = vals[0]
    second = np.empty((3, 3, 3), dtype=complex)  # [a, b, component]
    for a in range(3):
        second[a, a] = (vals[1 + 2 * a] - 2 * f0 + vals[2 + 2 * a]) / s ** 2
    n = 7
    for a in range(3):
        for b in range(a + 1, 3):
            pp, pm, mp, mm = vals[n:n + 4]
            second[a, b] = second[b, a] = (pp - pm - mp + mm) / (4 * s ** 2)
            n += 4
    lap = sum(second[a, a] for a in range(3))
    grad_div = np.array([sum(second[a, b, b] for b in range(3)) for a in range(3)])
    return grad_div - lap


def helmholtz_residual(field_fn, x, k, p=0.0, step=None):
    """``|curl curl E - k^2 E - p E| / |E|`` at ``x`` by finite differences."""
    s = 1e-3 / k if step is None else step
    x = np.asarray(x, dtype=float)
    E = np.asarray(field_fn(x[None, :]), dtype=complex).reshape(3)
    r = curl_curl(field_fn, x, s) - (k * k + p) * E
    nE = np.linalg.norm(E)
    if nE == 0:
        return float(np.linalg.norm(r))
    return float(np.linalg.norm(r) / nE)
