"""Quadrature for the weakly singular volume integrals of the Galerkin system.

Two families of integrals are needed:

* ``int_cell g(x - y) dy`` for a single cell, with ``x`` possibly inside the
  cell (:func:`integrate_g_cell`). The static part ``1/(4 pi r)`` uses the
  closed-form potential of a uniform cuboid, the bounded remainder
  ``(exp(ikr) - 1)/(4 pi r)`` a tensor Gauss rule.
* Galerkin entries between trilinear hats ``phi_m``, ``phi_m'``. On a uniform
  grid these depend only on the node offset ``delta = m' - m``. Writing
  ``Lambda = phi * phi`` (autocorrelation; a tensor product of cubic
  B-splines ``h B(z/h)``) the double integrals reduce exactly to::

      S(delta)    =  int g(z - delta h) Lambda(z) dz
      D_ij(delta) =  int d_j g(z - delta h) d_i Lambda(z) dz
                  = -int g(z - delta h) d_i d_j Lambda(z) dz

  ``d_i d_j Lambda`` is continuous and piecewise polynomial, so only the
  ``1/r`` singularity of ``g`` ever has to be integrated. It sits on a
  lattice point, i.e. at a corner of the unit cells that split the support,
  where a pyramid (Duffy) map removes it.

:func:`galerkin_g_entry` and :func:`galerkin_grad_entry` also offer a
``route="direct"`` evaluation of the original double integrals (outer Gauss
over the test support, singularity-aware inner rule) used to cross-check the
reduction.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ParameterError

log = logging.getLogger(__name__)

FOUR_PI = 4.0 * np.pi
_AXES = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))

__all__ = [
    "QuadratureRule",
    "gauss_legendre",
    "cuboid_potential",
    "singular_box_rule",
    "integrate_g_cell",
    "bspline",
    "KernelTables",
    "kernel_tables",
    "galerkin_g_entry",
    "galerkin_grad_entry",
]


@lru_cache(maxsize=None)
def gauss_legendre(n):
    """Gauss-Legendre nodes and weights on ``[0, 1]``."""
    x, w = np.polynomial.legendre.leggauss(int(n))
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=None)
def _tensor_gauss(n):
    x, w = gauss_legendre(n)
    pts = np.stack(np.meshgrid(x, x, x, indexing="ij"), axis=-1).reshape(-1, 3)
    wts = (w[:, None, None] * w[None, :, None] * w[None, None, :]).reshape(-1)
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts


@dataclass(frozen=True)
class QuadratureRule:
    """Orders for cell quadrature.

    ``order`` is used for cells farther than ``near_field_radius * h`` from
    the target, ``near_order`` for nearer ones and ``singular_order`` for the
    Duffy-mapped pyramids around a singular point.
    """

    order: int = 3
    near_order: int = 5
    near_field_radius: float = 2.0
    singular_order: int = 8

    def __post_init__(self):
        if min(self.order, self.near_order, self.singular_order) < 1:
            raise ParameterError("quadrature orders must be >= 1")
        if self.near_field_radius < 0:
            raise ParameterError("near_field_radius must be nonnegative")

    def doubled(self) -> "QuadratureRule":
        return QuadratureRule(2 * self.order, 2 * self.near_order, self.near_field_radius,
                              2 * self.singular_order)

    def points(self, lo, h, order=None):
        """Tensor Gauss points and weights on the cube ``[lo, lo + h]^3``; weights sum to ``h^3``."""
        pts, wts = _tensor_gauss(self.order if order is None else order)
        return np.asarray(lo, dtype=float) + h * pts, wts * h ** 3


# ----------------------------------------------------------------------------
# static cuboid potential


def _xlog(a, b, c):
    # a * b * log(c + R) with R = |(a, b, c)|, stable for c < 0
    R = np.sqrt(a * a + b * b + c * c)
    s = np.where(c >= 0, c + R, (a * a + b * b) / np.where(R - c > 0, R - c, 1.0))
    ab = a * b
    out = np.zeros_like(R)
    ok = (ab != 0) & (s > 0)
    out[ok] = ab[ok] * np.log(s[ok])
    return out


def _xatan(a, b, c):
    # a^2 * atan(b c / (a R)), written with arctan2 so tiny |a| cannot produce 0/0
    R = np.sqrt(a * a + b * b + c * c)
    return a * a * np.arctan2(b * c * np.sign(a), np.abs(a) * R)


def _cuboid_antiderivative(X, Y, Z):
    return (_xlog(X, Y, Z) + _xlog(Y, Z, X) + _xlog(Z, X, Y)
            - 0.5 * (_xatan(X, Y, Z) + _xatan(Y, Z, X) + _xatan(Z, X, Y)))


def cuboid_potential(x, lo, hi):
    """``int_[lo, hi] dy / |x - y|`` in closed form, for ``x`` of shape ``(..., 3)``."""
    x = np.asarray(x, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    total = np.zeros(x.shape[:-1])
    for cx, sx in ((hi[0], 1.0), (lo[0], -1.0)):
        for cy, sy in ((hi[1], 1.0), (lo[1], -1.0)):
            for cz, sz in ((hi[2], 1.0), (lo[2], -1.0)):
                total = total + sx * sy * sz * _cuboid_antiderivative(
                    cx - x[..., 0], cy - x[..., 1], cz - x[..., 2])
    return total


def _box_distance(lo, hi, t):
    d = np.maximum(np.maximum(lo - t, 0.0), t - hi)
    return float(np.linalg.norm(d))


def integrate_g_cell(target, cell, grid, k, rule=QuadratureRule()):
    """``int_cell exp(ik|x-y|) / (4 pi |x-y|) dy`` for one grid cell.

    Parameters
    ----------
    target : array_like, shape (3,)
        Observation point ``x``; may lie inside the cell.
    cell : array_like of int, shape (3,)
        Cell index in ``grid``.
    """
    t = np.asarray(target, dtype=float)
    h = grid.h
    lo = grid.origin + h * np.asarray(cell)
    hi = lo + h
    if _box_distance(lo, hi, t) < rule.near_field_radius * h:
        static = cuboid_potential(t, lo, hi) / FOUR_PI
        pts, wts = rule.points(lo, h, rule.near_order)
        r = np.linalg.norm(pts - t, axis=-1)
        # bounded remainder; its r -> 0 limit is ik / (4 pi)
        rem = np.where(r > 0, np.expm1(1j * k * r) / (FOUR_PI * np.where(r > 0, r, 1.0)), 1j * k / FOUR_PI)
        return complex(static + np.sum(wts * rem))
    pts, wts = rule.points(lo, h, rule.order)
    r = np.linalg.norm(pts - t, axis=-1)
    return complex(np.sum(wts * np.exp(1j * k * r) / (FOUR_PI * r)))


# ----------------------------------------------------------------------------
# singularity-aware box rules


def _pyramid_rule(lo, hi, apex, n):
    """Tile the box by pyramids with common apex and map each from the unit cube.

    The Jacobian carries a factor ``u^2`` that cancels a ``1/r`` (or
    ``1/r^2``) singularity at the apex.
    """
    pts_ref, w_ref = _tensor_gauss(n)
    U, V, W = pts_ref[:, 0], pts_ref[:, 1], pts_ref[:, 2]
    pts, wts = [], []
    for ax in range(3):
        a1, a2 = [a for a in range(3) if a != ax]
        l1 = hi[a1] - lo[a1]
        l2 = hi[a2] - lo[a2]
        for plane in (lo[ax], hi[ax]):
            d = abs(plane - apex[ax])
            if d == 0.0:
                continue
            F = np.empty((len(U), 3))
            F[:, ax] = plane
            F[:, a1] = lo[a1] + V * l1
            F[:, a2] = lo[a2] + W * l2
            pts.append(apex + U[:, None] * (F - apex))
            wts.append(w_ref * U ** 2 * d * l1 * l2)
    return np.concatenate(pts), np.concatenate(wts)


def singular_box_rule(lo, hi, target, n=8, max_aspect=2.0, _depth=0):
    """Points and weights integrating ``f(y) / |y - target|^a`` (``a <= 2``) over a box.

    A target inside the box is moved to a corner of sub-boxes by splitting;
    corner-singular sub-boxes get a pyramid rule; targets close to a box get
    recursive bisection, far ones a plain tensor Gauss rule.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    t = np.asarray(target, dtype=float)
    size = hi - lo
    tol = 1e-12 * size.max()
    if np.all(t >= lo - tol) and np.all(t <= hi + tol):
        t = np.clip(t, lo, hi)
        cuts = [[lo[a], hi[a]] if (t[a] - lo[a] <= tol or hi[a] - t[a] <= tol) else [lo[a], t[a], hi[a]]
                for a in range(3)]
        if any(len(c) == 3 for c in cuts):
            return _merge(singular_box_rule(np.array([cuts[0][i], cuts[1][j], cuts[2][l]]),
                                            np.array([cuts[0][i + 1], cuts[1][j + 1], cuts[2][l + 1]]),
                                            t, n, max_aspect, _depth + 1)
                          for i in range(len(cuts[0]) - 1)
                          for j in range(len(cuts[1]) - 1)
                          for l in range(len(cuts[2]) - 1))
        # snap the target onto the exact corner
        t = np.where(np.abs(t - lo) <= tol, lo, hi)
        if size.max() <= max_aspect * size.min() or _depth > 40:
            return _pyramid_rule(lo, hi, t, n)
        half = [[lo[a], hi[a]] if size[a] <= max_aspect * size.min() else [lo[a], 0.5 * (lo[a] + hi[a]), hi[a]]
                for a in range(3)]
        return _merge(singular_box_rule(np.array([half[0][i], half[1][j], half[2][l]]),
                                        np.array([half[0][i + 1], half[1][j + 1], half[2][l + 1]]),
                                        t, n, max_aspect, _depth + 1)
                      for i in range(len(half[0]) - 1)
                      for j in range(len(half[1]) - 1)
                      for l in range(len(half[2]) - 1))
    d = _box_distance(lo, hi, t)
    if d >= size.max() or _depth > 40:
        pts, wts = _tensor_gauss(n)
        return lo + pts * size, wts * np.prod(size)
    mid = 0.5 * (lo + hi)
    edges = np.stack([lo, mid, hi])
    return _merge(singular_box_rule(np.array([edges[i, 0], edges[j, 1], edges[l, 2]]),
                                    np.array([edges[i + 1, 0], edges[j + 1, 1], edges[l + 1, 2]]),
                                    t, n, max_aspect, _depth + 1)
                  for i in (0, 1) for j in (0, 1) for l in (0, 1))


def _merge(parts):
    parts = list(parts)
    return np.concatenate([p for p, _ in parts]), np.concatenate([w for _, w in parts])


# ----------------------------------------------------------------------------
# B-spline autocorrelation of the hat function


def bspline(t, deriv=0):
    """Centered cubic B-spline ``B`` (support ``[-2, 2]``, unit integral) or a derivative.

    ``B`` is the autocorrelation of the unit hat ``max(0, 1 - |t|)``.
    """
    t = np.asarray(t, dtype=float)
    a = np.abs(t)
    inner = a <= 1.0
    outer = (a > 1.0) & (a < 2.0)
    out = np.zeros_like(a)
    if deriv == 0:
        out[inner] = 2.0 / 3.0 - a[inner] ** 2 + 0.5 * a[inner] ** 3
        out[outer] = (2.0 - a[outer]) ** 3 / 6.0
    elif deriv == 1:
        out[inner] = -2.0 * a[inner] + 1.5 * a[inner] ** 2
        out[outer] = -0.5 * (2.0 - a[outer]) ** 2
        out *= np.sign(t)
    elif deriv == 2:
        out[inner] = -2.0 + 3.0 * a[inner]
        out[outer] = 2.0 - a[outer]
    else:
        raise ParameterError("deriv must be 0, 1 or 2")
    return out


def _weight_functions(u):
    """Rows: ``Lambda`` then ``d_i d_j Lambda`` in the order of ``_AXES`` (unit spacing)."""
    B = [bspline(u[:, a]) for a in range(3)]
    B1 = [bspline(u[:, a], 1) for a in range(3)]
    B2 = [bspline(u[:, a], 2) for a in range(3)]
    rows = [B[0] * B[1] * B[2]]
    for i, j in _AXES:
        if i == j:
            f = [B[a] if a != i else B2[a] for a in range(3)]
        else:
            f = [B1[a] if a in (i, j) else B[a] for a in range(3)]
        rows.append(f[0] * f[1] * f[2])
    return np.stack(rows)


def _green_unit(r, kh):
    return np.exp(1j * kh * r) / (FOUR_PI * r)


_CELLS = np.array([(a, b, c) for a in range(-2, 2) for b in range(-2, 2) for c in range(-2, 2)], dtype=float)


@lru_cache(maxsize=4096)
def _cell_rule_relative(rel_lo, n):
    """Singular rule for the unit cell ``[rel_lo, rel_lo + 1]`` with the singularity at the origin."""
    lo = np.array(rel_lo, dtype=float)
    pts, wts = singular_box_rule(lo, lo + 1.0, np.zeros(3), n)
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts


def _near_offset_integrals(delta, kh, n):
    """Return ``[S^, int g d_i d_j Lambda ...]`` at one integer offset (unit spacing)."""
    delta = np.asarray(delta, dtype=float)
    acc = np.zeros(7, dtype=complex)
    for c in _CELLS:
        rel = tuple((c - delta).tolist())
        pts, wts = _cell_rule_relative(rel, n)
        u = pts + delta
        r = np.linalg.norm(pts, axis=-1)
        acc += _weight_functions(u) @ (wts * _green_unit(r, kh))
    return acc


@lru_cache(maxsize=None)
def _composite_rule(q):
    x, w = gauss_legendre(q)
    X = np.concatenate([x + s for s in (-2.0, -1.0, 0.0, 1.0)])
    Wt = np.tile(w, 4)
    pts = np.stack(np.meshgrid(X, X, X, indexing="ij"), axis=-1).reshape(-1, 3)
    w3 = (Wt[:, None, None] * Wt[None, :, None] * Wt[None, None, :]).reshape(-1)
    weights = _weight_functions(pts) * w3
    return pts, weights


def _far_offset_integrals(deltas, kh, q, chunk=1024):
    pts, weights = _composite_rule(q)
    out = np.empty((len(deltas), 7), dtype=complex)
    for s in range(0, len(deltas), chunk):
        d = deltas[s:s + chunk].astype(float)
        r = np.sqrt(((pts[None, :, :] - d[:, None, :]) ** 2).sum(-1))
        out[s:s + chunk] = _green_unit(r, kh) @ weights.T
    return out


def _offset_integrals(delta, kh, rule):
    delta = np.asarray(delta, dtype=int)
    if np.abs(delta).max() <= _near_cutoff(rule):
        return _near_offset_integrals(delta, kh, rule.singular_order)
    return _far_offset_integrals(delta[None, :], kh, rule.order)[0]


def _near_cutoff(rule):
    # offsets whose singular point is closer than near_field_radius to the support
    return 2 + int(np.ceil(rule.near_field_radius))


def _unit_entries(raw):
    """Map raw integrals ``[int g Lambda, int g d_i d_j Lambda ...]`` to ``(S^, D^)``."""
    return raw[0], -raw[1:]


@dataclass(frozen=True)
class KernelTables:
    """Translation-invariant Galerkin entries on a uniform grid.

    Arrays are indexed by ``delta + extent`` for node offsets
    ``delta = m' - m`` with ``|delta_a| <= extent[a]``. Physical entries are
    ``gram * h^3``, ``single * h^5`` and ``grad[c] * h^3``, where ``c`` runs over
    the component pairs ``(0,0), (1,1), (2,2), (0,1), (0,2), (1,2)``.
    """

    kh: float
    extent: tuple
    gram: np.ndarray
    single: np.ndarray
    grad: np.ndarray
    rule: QuadratureRule

    def index(self, delta):
        delta = np.asarray(delta, dtype=int)
        return tuple(np.moveaxis(delta + np.asarray(self.extent), -1, 0))

    def grad_pair(self, i, j):
        for c, (a, b) in enumerate(_AXES):
            if (a, b) == (i, j) or (b, a) == (i, j):
                return self.grad[c]
        raise ParameterError("axis index out of range")


def _mirror(octant, extent, parity):
    """Extend an octant table (nonnegative offsets) to all offsets with per-axis parity."""
    full = octant
    for ax in range(3):
        n = extent[ax]
        neg = np.flip(np.take(full, np.arange(1, n + 1), axis=ax), axis=ax)
        if parity[ax] < 0:
            neg = -neg
            # odd in this axis: the zero-offset plane vanishes exactly
            full = full.copy()
            sl = [slice(None)] * full.ndim
            sl[ax] = 0
            full[tuple(sl)] = 0.0
        full = np.concatenate([neg, full], axis=ax)
    return full


def kernel_tables(kh, extent, rule=QuadratureRule()) -> KernelTables:
    """Compute Galerkin entry tables for offsets up to ``extent`` (per axis).

    ``kh`` is the exterior wavenumber times the grid spacing.
    """
    extent = tuple(int(e) for e in extent)
    shape = tuple(e + 1 for e in extent)
    offs = np.indices(shape).reshape(3, -1).T
    raw = np.empty((len(offs), 7), dtype=complex)
    cut = _near_cutoff(rule)
    near = offs.max(axis=1) <= cut
    for idx in np.flatnonzero(near):
        raw[idx] = _near_offset_integrals(offs[idx], kh, rule.singular_order)
    if np.any(~near):
        raw[~near] = _far_offset_integrals(offs[~near], kh, rule.order)
    raw = raw.reshape(shape + (7,))

    single = _mirror(raw[..., 0], extent, (1, 1, 1))
    grad = []
    for c, (i, j) in enumerate(_AXES):
        parity = [1, 1, 1]
        if i != j:
            parity[i] = parity[j] = -1
        grad.append(-_mirror(raw[..., 1 + c], extent, parity))
    grad = np.stack(grad)

    axes1d = [bspline(np.arange(-e, e + 1)) for e in extent]
    gram = axes1d[0][:, None, None] * axes1d[1][None, :, None] * axes1d[2][None, None, :]
    log.debug("kernel tables: kh=%g extent=%s near offsets=%d", kh, extent, int(near.sum()))
    return KernelTables(float(kh), extent, gram, single, grad, rule)


# ----------------------------------------------------------------------------
# single entries


def _delta(grid, m, mp):
    nodes = grid.interior_nodes
    return np.asarray(nodes[mp]) - np.asarray(nodes[m])


def galerkin_g_entry(m, mp, grid, k, rule=QuadratureRule(), route="convolution"):
    """``int int phi_m(x) g(x - y) phi_m'(y) dy dx`` for basis indices ``m, m'``."""
    d = _delta(grid, m, mp)
    h = grid.h
    if route == "convolution":
        raw = _offset_integrals(d, k * h, rule)
        return complex(raw[0] * h ** 5)
    if route == "direct":
        return complex(_direct_entry(d, k * h, "g", None, None, rule) * h ** 5)
    raise ParameterError(f"unknown route {route!r}")


def galerkin_grad_entry(m, i, mp, j, grid, k, rule=QuadratureRule(), route="convolution"):
    """``int int d_i phi_m(x) d_xj g(x - y) phi_m'(y) dy dx``.

    ``route="direct"`` integrates the original gradient form; ``"parts"``
    the equivalent ``int int d_i phi_m(x) g(x - y) d_j phi_m'(y) dy dx``.
    """
    d = _delta(grid, m, mp)
    h = grid.h
    if route == "convolution":
        raw = _offset_integrals(d, k * h, rule)
        for c, (a, b) in enumerate(_AXES):
            if (a, b) in ((i, j), (j, i)):
                return complex(-raw[1 + c] * h ** 3)
        raise ParameterError("axis index out of range")
    if route in ("direct", "parts"):
        return complex(_direct_entry(d, k * h, "grad" if route == "direct" else "parts", i, j, rule) * h ** 3)
    raise ParameterError(f"unknown route {route!r}")


def _hat(s):
    return np.prod(np.clip(1.0 - np.abs(s), 0.0, None), axis=-1)


def _hat_grad(s, i):
    f = np.clip(1.0 - np.abs(s), 0.0, None)
    out = -np.sign(s[..., i]) * (np.abs(s[..., i]) < 1.0)
    for a in range(3):
        if a != i:
            out = out * f[..., a]
    return out


def _direct_entry(delta, kh, kind, i, j, rule):
    """Outer Gauss over the test support times a singularity-aware inner rule (unit spacing)."""
    outer_n = max(rule.near_order, 4)
    inner_n = max(rule.singular_order - 2, 5)
    opts, owts = _tensor_gauss(outer_n)
    delta = np.asarray(delta, dtype=float)
    total = 0.0 + 0.0j
    for c in _CELLS[(np.abs(_CELLS + 0.5) < 1).all(axis=1)]:
        for xo, wo in zip(c + opts, owts):
            test = _hat(xo) if kind == "g" else _hat_grad(xo, i)
            if test == 0.0:
                continue
            inner = 0.0 + 0.0j
            for cc in _CELLS[(np.abs(_CELLS + 0.5) < 1).all(axis=1)]:
                lo = cc + delta
                pts, wts = singular_box_rule(lo, lo + 1.0, xo, inner_n)
                rv = xo - pts
                r = np.linalg.norm(rv, axis=-1)
                g = _green_unit(r, kh)
                s = pts - delta
                if kind == "g":
                    inner += np.sum(wts * g * _hat(s))
                elif kind == "parts":
                    inner += np.sum(wts * g * _hat_grad(s, j))
                else:
                    dg = g * (1j * kh - 1.0 / r) * rv[:, j] / r
                    inner += np.sum(wts * dg * _hat(s))
            total += wo * test * inner
    return total
