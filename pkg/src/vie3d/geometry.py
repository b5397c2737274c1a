"""Scatterer shapes and their voxelization on a uniform grid."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import EmptyScattererError, GridTooCoarseError, ParameterError

__all__ = ["ScattererShape", "ScattererGrid", "sphere", "box", "ellipsoid", "voxelize"]


@dataclass(frozen=True)
class ScattererShape:
    """A bounded body ``D`` described by an inside predicate.

    ``inside`` maps an ``(N, 3)`` array of positions to a boolean array. The
    optional ``surface`` callable returns ``(points, outward_normals)`` for a
    number of surface samples and is only needed by boundary diagnostics.
    """

    inside: Callable[[np.ndarray], np.ndarray]
    bbox_lo: np.ndarray
    bbox_hi: np.ndarray
    kind: str = "custom"
    params: dict = field(default_factory=dict)
    surface: Optional[Callable] = None

    def __post_init__(self):
        lo = np.asarray(self.bbox_lo, dtype=float).reshape(3)
        hi = np.asarray(self.bbox_hi, dtype=float).reshape(3)
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(hi > lo)):
            raise ParameterError("bounding box must be finite with hi > lo")
        object.__setattr__(self, "bbox_lo", lo)
        object.__setattr__(self, "bbox_hi", hi)

    def contains(self, x):
        """Inside test that is also false outside the bounding box."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        in_box = np.all((x > self.bbox_lo) & (x < self.bbox_hi), axis=-1)
        return in_box & np.asarray(self.inside(x), dtype=bool)

    @property
    def center(self):
        return 0.5 * (self.bbox_lo + self.bbox_hi)

    @property
    def diameter(self) -> float:
        """Bounding-box diagonal (an upper bound on the true diameter)."""
        return float(np.linalg.norm(self.bbox_hi - self.bbox_lo))

    @property
    def width(self) -> float:
        """Longest bounding-box edge; the diameter for a sphere."""
        return float(np.max(self.bbox_hi - self.bbox_lo))


def _fibonacci_sphere(n):
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    phi = np.pi * (1.0 + 5 ** 0.5) * i
    r = np.sqrt(1.0 - z ** 2)
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)


def sphere(radius, center=(0.0, 0.0, 0.0)) -> ScattererShape:
    c = np.asarray(center, dtype=float)
    a = float(radius)
    if a <= 0:
        raise ParameterError("radius must be positive")

    def inside(x):
        return np.sum((x - c) ** 2, axis=-1) < a * a

    def surface(n):
        u = _fibonacci_sphere(n)
        return c + a * u, u

    return ScattererShape(inside, c - a, c + a, "sphere", {"radius": a, "center": c}, surface)


def ellipsoid(semi_axes, center=(0.0, 0.0, 0.0)) -> ScattererShape:
    c = np.asarray(center, dtype=float)
    s = np.asarray(semi_axes, dtype=float).reshape(3)
    if np.any(s <= 0):
        raise ParameterError("semi axes must be positive")

    def inside(x):
        return np.sum(((x - c) / s) ** 2, axis=-1) < 1.0

    def surface(n):
        u = _fibonacci_sphere(n)
        nrm = u / s
        nrm /= np.linalg.norm(nrm, axis=-1, keepdims=True)
        return c + u * s, nrm

    return ScattererShape(inside, c - s, c + s, "ellipsoid", {"semi_axes": s, "center": c}, surface)


def box(lo, hi) -> ScattererShape:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)

    def inside(x):
        return np.all((x > lo) & (x < hi), axis=-1)

    def surface(n):
        # face centers only: a box has no smooth normal at edges
        c = 0.5 * (lo + hi)
        pts, nrm = [], []
        for ax in range(3):
            for sgn, val in ((-1.0, lo[ax]), (1.0, hi[ax])):
                p = c.copy()
                p[ax] = val
                v = np.zeros(3)
                v[ax] = sgn
                pts.append(p)
                nrm.append(v)
        return np.array(pts), np.array(nrm)

    return ScattererShape(inside, lo, hi, "box", {"lo": lo, "hi": hi}, surface)


@dataclass(frozen=True)
class ScattererGrid:
    """Voxelized body on a uniform axis-aligned grid.

    Node ``(i, j, l)`` sits at ``origin + h * (i, j, l)``; cell ``(i, j, l)``
    spans from that node to node ``(i+1, j+1, l+1)``. ``dims`` counts cells.
    """

    origin: np.ndarray
    h: float
    dims: tuple
    interior_cells: np.ndarray
    interior_nodes: np.ndarray
    shape: Optional[ScattererShape] = None
    node_rule: str = "cells"

    @property
    def cell_volume(self) -> float:
        return self.h ** 3

    @property
    def n_nodes(self) -> int:
        return len(self.interior_nodes)

    def cell_centers(self, cells=None):
        cells = self.interior_cells if cells is None else cells
        return self.origin + self.h * (np.asarray(cells) + 0.5)

    def node_positions(self, nodes=None):
        nodes = self.interior_nodes if nodes is None else nodes
        return self.origin + self.h * np.asarray(nodes)

    def cell_mask(self):
        mask = np.zeros(self.dims, dtype=bool)
        c = self.interior_cells
        mask[c[:, 0], c[:, 1], c[:, 2]] = True
        return mask

    def node_mask(self):
        mask = np.zeros(tuple(d + 1 for d in self.dims), dtype=bool)
        n = self.interior_nodes
        mask[n[:, 0], n[:, 1], n[:, 2]] = True
        return mask

    def support_cells(self):
        """Cells touched by at least one basis function (any interior-node corner)."""
        nm = self.node_mask()
        touched = np.zeros(self.dims, dtype=bool)
        for a in (0, 1):
            for b in (0, 1):
                for c in (0, 1):
                    touched |= nm[a:a + self.dims[0], b:b + self.dims[1], c:c + self.dims[2]]
        return np.argwhere(touched)


def voxelize(shape: ScattererShape, h, node_rule="cells", pad=1) -> ScattererGrid:
    """Voxelize ``shape`` with cell size ``h``.

    The grid is centered on the bounding box. A cell is interior when its
    center satisfies the inside predicate.

    Parameters
    ----------
    node_rule : {"cells", "inside"}
        ``"cells"`` keeps nodes whose eight adjacent cells are all interior,
        so every hat function is supported in the voxelized body.
        ``"inside"`` keeps nodes that themselves lie inside the body; the
        hats then straddle the surface and their summed volume matches the
        body volume to lattice-counting accuracy.
    """
    h = float(h)
    extent = shape.bbox_hi - shape.bbox_lo
    if not (np.isfinite(h) and h > 0):
        raise ParameterError("h must be positive")
    if h >= extent.min():
        raise ParameterError("h must be smaller than the shortest bounding-box edge")
    if node_rule not in ("cells", "inside"):
        raise ParameterError(f"unknown node rule {node_rule!r}")

    n = np.ceil(extent / h - 1e-9).astype(int) + 2 * pad
    origin = shape.center - 0.5 * n * h
    dims = tuple(int(v) for v in n)

    idx = np.indices(dims).reshape(3, -1).T
    centers = origin + h * (idx + 0.5)
    cells = idx[shape.contains(centers)]
    if len(cells) == 0:
        raise EmptyScattererError("empty scatterer: no cell center lies inside the shape")

    cmask = np.zeros(dims, dtype=bool)
    cmask[cells[:, 0], cells[:, 1], cells[:, 2]] = True
    if node_rule == "cells":
        # node (i,j,l) with 1 <= i <= nx-1 touches cells i-1 and i along each axis
        full = np.ones(tuple(d - 1 for d in dims), dtype=bool)
        for a in (0, 1):
            for b in (0, 1):
                for c in (0, 1):
                    full &= cmask[a:a + dims[0] - 1, b:b + dims[1] - 1, c:c + dims[2] - 1]
        nodes = np.argwhere(full) + 1
    else:
        nidx = np.indices(tuple(d - 1 for d in dims)).reshape(3, -1).T + 1
        nodes = nidx[shape.contains(origin + h * nidx)]
    if len(nodes) == 0:
        raise GridTooCoarseError("grid too coarse: no interior node")
    return ScattererGrid(origin, h, dims, cells, nodes, shape, node_rule)
