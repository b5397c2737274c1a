"""Galerkin discretization with trilinear hat functions on interior grid nodes.

The unknowns are the expansion coefficients ``c[i*M + m]`` of field component
``i`` on hat ``phi_m``. Testing the field equation against ``phi_m`` and
moving the outer gradient onto the test function gives::

    (Gram - p S + gamma D) c = b

with ``Gram[m, m'] = <phi_m', phi_m>``, ``S`` the ``g`` double integrals
(diagonal in the component), ``D[(i,m), (j,m')]`` the gradient double
integrals and ``b[(i,m)] = <E0_i, phi_m>``.
"""
from __future__ import annotations

import logging
import struct
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
import scipy.sparse as sp

from .errors import GridTooCoarseError, ParameterError
from .geometry import ScattererGrid
from .medium import MediumParams, PlaneWave, derive_wavenumbers, incident_field
from .quadrature import QuadratureRule, KernelTables, kernel_tables, gauss_legendre, bspline, _AXES

log = logging.getLogger(__name__)

__all__ = ["BasisSet", "GalerkinSystem", "build_basis", "assemble", "project", "dump_system", "load_system"]


@dataclass(frozen=True)
class BasisSet:
    """Trilinear hats centered on the interior nodes of a grid."""

    grid: ScattererGrid
    gram: sp.csr_matrix

    @property
    def M(self) -> int:
        return self.grid.n_nodes

    @property
    def nodes(self):
        return self.grid.interior_nodes

    def support(self, m):
        """Indices of the eight cells adjacent to node ``m``."""
        n = self.nodes[m]
        return np.array([n - 1 + np.array(o) for o in np.ndindex(2, 2, 2)])

    def evaluate(self, x, m=None):
        """Values of all hats (``(N, M)`` sparse) or of hat ``m`` at positions ``x``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        s = (x - self.grid.origin) / self.grid.h
        if m is not None:
            d = s - self.nodes[m]
            return np.prod(np.clip(1.0 - np.abs(d), 0.0, None), axis=-1)
        base = np.floor(s).astype(int)
        frac = s - base
        lookup = _node_lookup(self.grid)
        rows, cols, vals = [], [], []
        for o in np.ndindex(2, 2, 2):
            o = np.array(o)
            node = base + o
            w = np.prod(np.where(o == 1, frac, 1.0 - frac), axis=-1)
            idx = lookup(node)
            ok = (idx >= 0) & (w > 0)
            rows.append(np.flatnonzero(ok))
            cols.append(idx[ok])
            vals.append(w[ok])
        return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(len(x), self.M))


def _node_lookup(grid):
    dims = tuple(d + 1 for d in grid.dims)
    table = -np.ones(dims, dtype=np.int64)
    n = grid.interior_nodes
    table[n[:, 0], n[:, 1], n[:, 2]] = np.arange(len(n))

    def lookup(idx):
        idx = np.asarray(idx)
        ok = np.all((idx >= 0) & (idx < np.array(dims)), axis=-1)
        out = -np.ones(idx.shape[:-1], dtype=np.int64)
        good = idx[ok]
        out[ok] = table[good[:, 0], good[:, 1], good[:, 2]]
        return out

    return lookup


def _pair_offsets(nodes_a, nodes_b):
    return nodes_b[None, :, :] - nodes_a[:, None, :]


def build_basis(grid: ScattererGrid) -> BasisSet:
    """Hat basis on the interior nodes with its exact (sparse) Gram matrix."""
    if grid.n_nodes == 0:
        raise GridTooCoarseError("grid too coarse: no interior node")
    nodes = grid.interior_nodes
    lookup = _node_lookup(grid)
    one_d = {-1: bspline(1.0), 0: bspline(0.0), 1: bspline(1.0)}
    rows, cols, vals = [], [], []
    for o in np.ndindex(3, 3, 3):
        o = np.array(o) - 1
        j = lookup(nodes + o)
        ok = j >= 0
        rows.append(np.flatnonzero(ok))
        cols.append(j[ok])
        vals.append(np.full(ok.sum(), one_d[o[0]] * one_d[o[1]] * one_d[o[2]] * grid.h ** 3))
    gram = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(len(nodes), len(nodes)))
    return BasisSet(grid, gram)



@lru_cache(maxsize=4)
def _projection_rule(order):
    """Points on the hat support ``[-1, 1]^3`` (unit spacing) with hat-weighted Gauss weights."""
    x, w = gauss_legendre(order)
    pts, wts = [], []
    for c in np.ndindex(2, 2, 2):
        lo = np.array(c, dtype=float) - 1.0
        P = np.stack(np.meshgrid(x, x, x, indexing="ij"), axis=-1).reshape(-1, 3) + lo
        W = (w[:, None, None] * w[None, :, None] * w[None, None, :]).reshape(-1)
        pts.append(P)
        wts.append(W * np.prod(1.0 - np.abs(P), axis=-1))
    return np.concatenate(pts), np.concatenate(wts)


def project(basis: BasisSet, fn: Callable, order=5, chunk=256):
    """Load vector ``<fn_i, phi_m>`` as an ``(3, M)`` array, by Gauss rules of ``order`` per cell."""
    grid = basis.grid
    pts, wts = _projection_rule(order)
    pos = grid.node_positions()
    out = np.empty((3, basis.M), dtype=complex)
    for s in range(0, basis.M, chunk):
        x = pos[s:s + chunk, None, :] + grid.h * pts[None, :, :]
        vals = np.asarray(fn(x.reshape(-1, 3))).reshape(x.shape[0], x.shape[1], 3)
        out[:, s:s + chunk] = np.einsum("npi,p->in", vals, wts) * grid.h ** 3
    return out


@dataclass
class GalerkinSystem:
    """Linear system ``A c = b`` of the Galerkin method.

    ``A`` is kept as translation-invariant tables; :meth:`dense` materializes
    it and :meth:`matvec` applies it through FFT convolutions on the bounding
    node box.
    """

    basis: BasisSet
    medium: MediumParams
    tables: KernelTables
    b: np.ndarray
    incident: Optional[PlaneWave] = None
    _fast: object = field(default=None, repr=False)

    @property
    def grid(self):
        return self.basis.grid

    @property
    def M(self):
        return self.basis.M

    @property
    def size(self):
        return 3 * self.basis.M

    @property
    def coefficients(self):
        """Scalars ``(w_gram, w_single, w_grad)`` with ``A = h^3 (w_gram Gram^ + w_single S^ + w_grad D^)``."""
        h = self.grid.h
        k, K, gamma = derive_wavenumbers(self.medium)
        p = 0j if self.medium.zero_contrast else self.medium.contrast
        return 1.0, -p * h * h, gamma

    def kernel(self, i, j):
        """Offset table of block ``(i, j)`` of ``A`` (physical units)."""
        wg, ws, wd = self.coefficients
        h3 = self.grid.h ** 3
        out = wd * self.tables.grad_pair(i, j)
        if i == j:
            out = out + wg * self.tables.gram + ws * self.tables.single
        return h3 * out

    def dense(self):
        """Materialize ``A`` as a ``(3M, 3M)`` complex array."""
        nodes = self.basis.nodes
        idx = self.tables.index(_pair_offsets(nodes, nodes))
        M = self.M
        A = np.zeros((3 * M, 3 * M), dtype=complex)
        for i in range(3):
            for j in range(i, 3):
                blk = self.kernel(i, j)[idx]
                A[i * M:(i + 1) * M, j * M:(j + 1) * M] = blk
                if j != i:
                    A[j * M:(j + 1) * M, i * M:(i + 1) * M] = blk.T
        return A

    def block_dense(self, which):
        """One of the unscaled operators ``"gram"``, ``"single"`` or ``"grad"`` as a dense ``(3M, 3M)`` array."""
        nodes = self.basis.nodes
        idx = self.tables.index(_pair_offsets(nodes, nodes))
        M = self.M
        h = self.grid.h
        out = np.zeros((3 * M, 3 * M), dtype=complex)
        for i in range(3):
            for j in range(3):
                if which == "grad":
                    blk = self.tables.grad_pair(i, j)[idx] * h ** 3
                elif i == j:
                    blk = (self.tables.gram if which == "gram" else self.tables.single * h * h)[idx] * h ** 3
                else:
                    continue
                out[i * M:(i + 1) * M, j * M:(j + 1) * M] = blk
        return out

    def matvec(self, c):
        if self._fast is None:
            from .solver import ConvolutionOperator

            self._fast = ConvolutionOperator(self)
        return self._fast.matvec(c)

    def with_rhs(self, b) -> "GalerkinSystem":
        return GalerkinSystem(self.basis, self.medium, self.tables, np.asarray(b, dtype=complex).reshape(-1),
                              None, self._fast)


def node_extent(grid: ScattererGrid):
    nodes = grid.interior_nodes
    return tuple(int(v) for v in nodes.max(axis=0) - nodes.min(axis=0))


def assemble(grid: ScattererGrid, basis: BasisSet, medium: MediumParams,
             incident: Union[PlaneWave, Callable], rule: QuadratureRule = QuadratureRule(),
             tables: Optional[KernelTables] = None) -> GalerkinSystem:
    """Build the Galerkin system for an incident plane wave (or any field callable)."""
    if basis.grid is not grid:
        raise ParameterError("basis was built on a different grid")
    k = medium.k
    if tables is None:
        tables = kernel_tables(k * grid.h, node_extent(grid), rule)
    if isinstance(incident, PlaneWave):
        b = project(basis, lambda x: incident_field(incident, k, x))
        pw = incident
    else:
        b = project(basis, incident)
        pw = None
    return GalerkinSystem(basis, medium, tables, b.reshape(-1), pw)


def dump_system(system: GalerkinSystem, path):
    """Write ``A`` and ``b``: header ``<u8 rows, u8 cols>``, then ``A`` row-major, then ``b``.

    Complex numbers are stored as (real, imag) little-endian float64 pairs.
    """
    A = system.dense()
    with open(path, "wb") as f:
        f.write(struct.pack("<QQ", *A.shape))
        f.write(np.ascontiguousarray(A, dtype="<c16").tobytes())
        f.write(np.ascontiguousarray(system.b, dtype="<c16").tobytes())


def load_system(path):
    with open(path, "rb") as f:
        rows, cols = struct.unpack("<QQ", f.read(16))
        A = np.frombuffer(f.read(16 * rows * cols), dtype="<c16").reshape(rows, cols)
        b = np.frombuffer(f.read(16 * rows), dtype="<c16")
    return A.copy(), b.copy()
