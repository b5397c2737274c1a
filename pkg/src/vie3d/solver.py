"""Dense and FFT-accelerated iterative solution of the Galerkin system."""
from __future__ import annotations

import logging
import os
import time
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.fft
import scipy.linalg
import scipy.sparse.linalg as spla

from .errors import NonConvergenceError, ParameterError, SolverError

log = logging.getLogger(__name__)

__all__ = ["SolveReport", "ConvolutionOperator", "solve_dense", "solve_iterative", "solve", "DENSE_CAP"]

DENSE_CAP = 6000


def fft_workers():
    """Worker count for ``scipy.fft`` taken from ``VIE3D_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("VIE3D_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class SolveReport:
    method: str
    iterations: int
    relative_residual: float
    elapsed: float


class ConvolutionOperator:
    """Apply ``A`` by zero-padded FFT convolution on the bounding box of the interior nodes.

    Each block ``A_ij`` is a convolution with an even kernel over node
    offsets, so a circulant embedding of size ``>= 2n - 1`` per axis is exact.
    """

    def __init__(self, system):
        nodes = system.basis.nodes
        self.M = len(nodes)
        self.lo = nodes.min(axis=0)
        n = nodes.max(axis=0) - self.lo + 1
        self.n = tuple(int(v) for v in n)
        self.shape = tuple(scipy.fft.next_fast_len(2 * v - 1) for v in self.n)
        self.local = tuple((nodes - self.lo).T)
        ext = system.tables.extent
        if any(e < v - 1 for e, v in zip(ext, self.n)):
            raise ParameterError("kernel tables do not cover the node box")
        self.workers = fft_workers()
        self.kernels = {}
        for i in range(3):
            for j in range(i, 3):
                table = system.kernel(i, j)
                emb = np.zeros(self.shape, dtype=complex)
                # offsets -(n-1)..(n-1) wrapped into the periodic box
                sl = tuple(slice(e - (v - 1), e + v) for e, v in zip(ext, self.n))
                sub = table[sl]
                idx = np.ix_(*[np.arange(-(v - 1), v) % s for v, s in zip(self.n, self.shape)])
                emb[idx] = sub
                self.kernels[i, j] = scipy.fft.fftn(emb, workers=self.workers)

    def matvec(self, c):
        c = np.asarray(c, dtype=complex).reshape(3, self.M)
        if not hasattr(self, "_spec"):
            # persistent work arrays; fresh large temporaries cost more than the FFTs
            self._spec = [np.zeros(self.shape, dtype=complex) for _ in range(3)]
            self._acc = np.empty(self.shape, dtype=complex)
            self._tmp = np.empty(self.shape, dtype=complex)
        spec, acc, tmp = self._spec, self._acc, self._tmp
        for i in range(3):
            spec[i].fill(0)
            spec[i][self.local] = c[i]
            spec[i][...] = scipy.fft.fftn(spec[i], workers=self.workers, overwrite_x=True)
        out = np.empty((3, self.M), dtype=complex)
        for i in range(3):
            np.multiply(self.kernels[min(i, 0), max(i, 0)], spec[0], out=acc)
            for j in (1, 2):
                np.multiply(self.kernels[min(i, j), max(i, j)], spec[j], out=tmp)
                acc += tmp
            out[i] = scipy.fft.ifftn(acc, workers=self.workers, overwrite_x=True)[self.local]
        return out.reshape(-1)

    def as_linear_operator(self):
        n = 3 * self.M
        return spla.LinearOperator((n, n), matvec=self.matvec, dtype=complex)


def _residual(apply, c, b):
    nb = np.linalg.norm(b)
    r = np.linalg.norm(apply(c) - b)
    return r / nb if nb > 0 else r


def solve_dense(system, dense_cap=DENSE_CAP):
    """LU solve of the materialized system; the residual is recomputed from ``A``."""
    n = system.size
    if n > dense_cap:
        raise ParameterError(f"3M = {n} exceeds the dense cap {dense_cap}")
    t0 = time.perf_counter()
    A = system.dense()
    b = system.b
    if not np.any(b):
        c = np.zeros_like(b)
    else:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
                lu = scipy.linalg.lu_factor(A, check_finite=True)
            if np.any(np.diag(lu[0]) == 0):
                raise np.linalg.LinAlgError("exactly singular")
            c = scipy.linalg.lu_solve(lu, b)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning, ValueError) as exc:
            cond = np.linalg.cond(A)
            raise SolverError(f"dense solve failed: {exc}; condition estimate {cond:.3e}", condition=cond) from exc
    res = _residual(lambda v: A @ v, c, b)
    report = SolveReport("dense", 0, float(res), time.perf_counter() - t0)
    log.info("dense solve: 3M=%d residual=%.3e in %.2fs", n, res, report.elapsed)
    return c, report


def _gram_preconditioner(system):
    lu = spla.splu(system.basis.gram.tocsc().astype(complex))
    M = system.M

    def apply(v):
        v = np.asarray(v).reshape(3, M)
        return np.concatenate([lu.solve(v[i]) for i in range(3)])

    return spla.LinearOperator((3 * M, 3 * M), matvec=apply, dtype=complex)


def solve_iterative(system, tol=1e-8, max_iter=500, preconditioner=None, restart=60, x0=None):
    """GMRES on the FFT operator.

    Convergence is judged on the true residual ``|A c - b| / |b|``, recomputed
    with a fresh matvec; GMRES is restarted from its own iterate until that
    holds or ``max_iter`` inner iterations are used.
    """
    if not tol > 0:
        raise ParameterError("tol must be positive")
    t0 = time.perf_counter()
    b = system.b
    op = spla.LinearOperator((system.size, system.size), matvec=system.matvec, dtype=complex)
    if not np.any(b):
        return np.zeros_like(b), SolveReport("iterative", 0, 0.0, time.perf_counter() - t0)
    P = None
    if preconditioner == "gram":
        P = _gram_preconditioner(system)
    elif preconditioner not in (None, "none"):
        raise ParameterError(f"unknown preconditioner {preconditioner!r}")

    count = [0]

    def cb(_):
        count[0] += 1

    c = None if x0 is None else np.asarray(x0, dtype=complex)
    best = (np.inf, c)
    inner_tol = tol
    while count[0] < max_iter:
        # one restart cycle per call so the iteration cap is exact
        c, info = spla.gmres(op, b, x0=c, rtol=inner_tol, atol=0.0, restart=min(restart, max_iter - count[0]),
                             maxiter=1, M=P, callback=cb, callback_type="pr_norm")
        res = _residual(system.matvec, c, b)
        if res < best[0]:
            best = (res, c)
        if res <= tol:
            break
        if info == 0:
            # the preconditioned residual met its target but the true one did not
            inner_tol = max(inner_tol * 0.1, 1e-15)
    res, c = best
    elapsed = time.perf_counter() - t0
    if res > tol:
        raise NonConvergenceError(f"GMRES did not reach {tol:g} in {count[0]} iterations (best {res:.3e})",
                                  best_residual=res, iterations=count[0])
    log.info("iterative solve: 3M=%d iterations=%d residual=%.3e in %.2fs", system.size, count[0], res, elapsed)
    return c, SolveReport("iterative", count[0], float(res), elapsed)


def solve(system, method="auto", tol=1e-8, max_iter=500, dense_cap=DENSE_CAP, preconditioner=None):
    """Dispatch to :func:`solve_dense` or :func:`solve_iterative`; ``"auto"`` picks dense below the cap."""
    if method == "auto":
        method = "dense" if system.size <= dense_cap else "iterative"
    if method == "dense":
        return solve_dense(system, dense_cap)
    if method == "iterative":
        return solve_iterative(system, tol, max_iter, preconditioner)
    raise ParameterError(f"unknown solver method {method!r}")
