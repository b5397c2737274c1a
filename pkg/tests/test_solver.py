import numpy as np
import pytest
from hypothesis import given, strategies as st

from vie3d import (MediumParams, NonConvergenceError, ParameterError, PlaneWave, SolverError, assemble,
                   build_basis, box, solve, solve_dense, solve_iterative, sphere, voxelize)
from vie3d.solver import ConvolutionOperator


class DenseStub:
    """Minimal system exposing what the dense path needs."""

    def __init__(self, A, b):
        self._A = A
        self.b = b
        self.size = len(b)

    def dense(self):
        return self._A


def zero_contrast_system(h=0.1):
    g = voxelize(sphere(0.5), h)
    return assemble(g, build_basis(g), MediumParams.from_wavenumber(1.0, 1.0), PlaneWave([0, 0, 1], [1, 0, 0]))


class TestDense:
    def test_zero_contrast_is_gram_solve(self):
        s = zero_contrast_system(0.125)
        c, rep = solve_dense(s)
        G = s.basis.gram.toarray()
        ref = np.concatenate([np.linalg.solve(G, bi) for bi in s.b.reshape(3, -1)])
        assert np.allclose(c, ref, rtol=1e-12)
        assert rep.method == "dense" and rep.iterations == 0 and rep.relative_residual < 1e-10

    def test_random_system(self, rng):
        A = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12)) + 6 * np.eye(12)
        b = rng.normal(size=12) + 1j * rng.normal(size=12)
        c, rep = solve_dense(DenseStub(A, b))
        assert np.linalg.norm(A @ c - b) / np.linalg.norm(b) < 1e-12
        assert rep.relative_residual < 1e-12

    def test_singular_reports_condition(self):
        A = np.ones((6, 6), dtype=complex)
        with pytest.raises(SolverError) as info:
            solve_dense(DenseStub(A, np.arange(6, dtype=complex)))
        assert info.value.condition is not None and info.value.condition > 1e12

    def test_dense_cap(self, cube_system):
        with pytest.raises(ParameterError):
            solve_dense(cube_system, dense_cap=10)


class TestIterative:
    def test_matches_dense_81_unknowns(self):
        g = voxelize(box([0, 0, 0], [0.4, 0.4, 0.4]), 0.1)
        s = assemble(g, build_basis(g), MediumParams.from_wavenumber(2.0, 3.0 + 0.5j), PlaneWave([0, 1, 0], [0, 0, 1]))
        assert s.size == 81
        cd, _ = solve_dense(s)
        ci, rep = solve_iterative(s, tol=1e-12)
        assert np.linalg.norm(ci - cd) / np.linalg.norm(cd) < 1e-8
        assert rep.relative_residual <= 1e-12

    def test_fast_matvec_equals_dense(self, cube_system, rng):
        assert cube_system.M == 125
        A = cube_system.dense()
        for _ in range(3):
            v = rng.normal(size=cube_system.size) + 1j * rng.normal(size=cube_system.size)
            ref = A @ v
            assert np.linalg.norm(cube_system.matvec(v) - ref) / np.linalg.norm(ref) < 1e-10

    def test_fast_matvec_sphere(self, rng):
        g = voxelize(sphere(0.5), 0.1)
        s = assemble(g, build_basis(g), MediumParams.from_wavenumber(3.0, 2.0), PlaneWave([0, 0, 1], [1, 0, 0]))
        v = rng.normal(size=s.size) + 1j * rng.normal(size=s.size)
        ref = s.dense() @ v
        assert np.linalg.norm(s.matvec(v) - ref) / np.linalg.norm(ref) < 1e-12

    def test_zero_contrast_gram_preconditioned(self):
        s = zero_contrast_system()
        c, rep = solve_iterative(s, tol=1e-10, preconditioner="gram")
        assert rep.iterations <= 5

    def test_zero_contrast_unpreconditioned_bounded(self):
        # the Gram matrix of trilinear hats has condition number below 27; for a
        # Hermitian positive definite matrix that bounds the count by about
        # sqrt(27) / 2 * log(2 / tol) ~ 60 independently of the grid
        for h in (0.125, 0.0625):
            _, rep = solve_iterative(zero_contrast_system(h), tol=1e-10)
            assert rep.iterations <= 60

    def test_non_convergence(self, cube_system):
        with pytest.raises(NonConvergenceError) as info:
            solve_iterative(cube_system, tol=1e-14, max_iter=3, restart=3)
        assert info.value.best_residual is not None and info.value.best_residual > 1e-14
        assert info.value.iterations == 3

    def test_bad_tolerance(self, cube_system):
        with pytest.raises(ParameterError):
            solve_iterative(cube_system, tol=0.0)

    def test_zero_rhs(self, cube_system):
        c, rep = solve_iterative(cube_system.with_rhs(np.zeros(cube_system.size)))
        assert not np.any(c) and rep.iterations == 0

    @given(st.complex_numbers(min_magnitude=0.1, max_magnitude=10.0))
    def test_linearity(self, alpha):
        s = _cube()
        c1, _ = solve(s, "iterative", tol=1e-12)
        c2, _ = solve(s.with_rhs(alpha * s.b), "iterative", tol=1e-12)
        assert np.linalg.norm(c2 - alpha * c1) <= 1e-9 * np.linalg.norm(alpha * c1)

    def test_auto_dispatch(self, cube_system):
        _, rep = solve(cube_system)
        assert rep.method == "dense"
        _, rep = solve(cube_system, dense_cap=10)
        assert rep.method == "iterative"
        with pytest.raises(ParameterError):
            solve(cube_system, "cholesky")

    def test_residual_is_recomputed(self, cube_system):
        c, rep = solve_iterative(cube_system, tol=1e-9)
        true = np.linalg.norm(cube_system.dense() @ c - cube_system.b) / np.linalg.norm(cube_system.b)
        assert rep.relative_residual == pytest.approx(true, rel=1e-6)


_CUBE = {}


def _cube():
    if "s" not in _CUBE:
        g = voxelize(box([0, 0, 0], [0.4, 0.4, 0.4]), 0.1)
        _CUBE["s"] = assemble(g, build_basis(g), MediumParams.from_wavenumber(2.0, 2.0), PlaneWave([0, 0, 1], [1, 0, 0]))
    return _CUBE["s"]
