import numpy as np
import pytest

from vie3d import MediumParams, PlaneWave, ParameterError, incident_curl, incident_field, sphere
from vie3d.oracles.fd import helmholtz_residual
from vie3d.oracles.mie import rayleigh_sigma
from vie3d.postprocess import (boundary_diagnostic, cross_sections, eval_field, eval_H, eval_scattered, far_field,
                               radiation_check, sphere_rule)

from conftest import make_solution


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


@pytest.fixture(scope="module")
def zero_solution():
    return make_solution(sphere(0.5), 0.125, 1.0)


class TestFieldEvaluation:
    def test_zero_contrast_exterior_is_incident(self, zero_solution, rng):
        x = 2.0 * unit(rng.normal(size=3)) + rng.normal(size=(10, 3)) * 0.1
        E = eval_field(zero_solution, x)
        assert np.array_equal(E, incident_field(zero_solution.incident, zero_solution.k, x))

    def test_zero_contrast_bulk_is_incident(self):
        # inside, the reconstruction is the L2 projection of E0 onto the hats;
        # it settles to E0 away from the boundary layer once h is small
        s = make_solution(sphere(0.5), 0.0625, 1.0)
        x = np.array([[0.0, 0.0, 0.0], [0.05, -0.1, 0.08]])
        E = eval_field(s, x)
        E0 = incident_field(s.incident, s.k, x)
        assert np.abs(E - E0).max() < 2e-3

    def test_zero_contrast_moments_are_load(self, zero_solution):
        m = zero_solution.moments
        assert np.allclose(m.reshape(-1), zero_solution.system.b, rtol=1e-10, atol=1e-14)

    def test_one_over_r_decay(self, small_sphere_solution):
        k = small_sphere_solution.k
        d = unit([0.3, -0.5, 0.8])
        V1 = eval_scattered(small_sphere_solution, 100 / k * d)
        V2 = eval_scattered(small_sphere_solution, 200 / k * d)
        assert np.linalg.norm(V1) / np.linalg.norm(V2) == pytest.approx(2.0, rel=0.05)

    def test_one_over_r_far(self, small_sphere_solution):
        k = small_sphere_solution.k
        d = unit([1.0, 0.2, 0.1])
        a = 500 / k * np.linalg.norm(eval_scattered(small_sphere_solution, 500 / k * d))
        b = 1000 / k * np.linalg.norm(eval_scattered(small_sphere_solution, 1000 / k * d))
        assert a == pytest.approx(b, rel=1e-2)

    def test_linearity(self, small_sphere_solution):
        from vie3d.postprocess import FieldSolution
        s = small_sphere_solution
        doubled = FieldSolution(2 * s.coefficients, s.system.with_rhs(2 * s.system.b), s.report)
        object.__setattr__(doubled.system, "incident", s.incident.scaled(2))
        x = np.array([[0.0, 0.0, 0.1], [0.0, 1.0, 0.7], [3.0, 0.0, 0.0]])
        assert np.allclose(eval_field(doubled, x), 2 * eval_field(s, x), rtol=1e-13, atol=0)
        A1 = far_field(s, np.eye(3)).amplitude
        assert np.allclose(far_field(doubled, np.eye(3)).amplitude, 2 * A1, rtol=1e-13, atol=1e-300)

    def test_interior_reconstruction_continuous(self, small_sphere_solution):
        g = small_sphere_solution.grid
        face = g.node_positions()[0] + np.array([0.3, 0.4, 0.0]) * g.h
        below = eval_field(small_sphere_solution, face[None] - [0, 0, 1e-12])
        above = eval_field(small_sphere_solution, face[None] + [0, 0, 1e-12])
        assert np.allclose(below, above, atol=1e-10)

    def test_boundary_layer_flag(self, small_sphere_solution):
        E, flags = eval_field(small_sphere_solution, np.array([[0, 0, 0.0], [0, 0, 0.49], [0, 0, 0.53], [0, 0, 2]]),
                              with_flags=True)
        assert list(flags) == [False, True, True, False]

    def test_exterior_field_solves_helmholtz(self, small_sphere_solution):
        k = small_sphere_solution.k
        for x in (np.array([1.5, 0.3, -0.4]), np.array([0.0, -2.5, 1.0])):
            r = helmholtz_residual(lambda y: eval_scattered(small_sphere_solution, y), x, k)
            assert r < 1e-3

    def test_near_surface_weak_form_is_continuous(self, small_sphere_solution):
        # the scattered-field representation stays smooth when approaching the support
        x = np.array([[0.0, 0.0, 0.56 + t] for t in (0.0, 1e-3)])
        V = eval_scattered(small_sphere_solution, x)
        assert np.linalg.norm(V[0] - V[1]) < 1e-2 * np.linalg.norm(V[0])


class TestMagneticField:
    def test_plane_wave_identity(self, zero_solution):
        x = np.array([[2.0, 0.0, 0.0], [0.0, -3.0, 1.0]])
        m = zero_solution.medium
        pw = zero_solution.incident
        ref = (m.k / (m.omega * m.mu0)) * np.cross(pw.direction, incident_field(pw, m.k, x))
        assert np.allclose(eval_H(zero_solution, x), ref, rtol=1e-13)

    def test_finite_difference_curl(self, small_sphere_solution):
        s = small_sphere_solution
        m = s.medium
        x = np.array([0.9, -0.4, 0.5])
        step = 1e-4 / s.k
        J = np.empty((3, 3), dtype=complex)  # J[a, c] = d E_c / d x_a
        for a in range(3):
            e = np.zeros(3)
            e[a] = step
            J[a] = (eval_field(s, (x + e)[None])[0] - eval_field(s, (x - e)[None])[0]) / (2 * step)
        curl = np.array([J[1, 2] - J[2, 1], J[2, 0] - J[0, 2], J[0, 1] - J[1, 0]])
        H_fd = curl / (1j * m.omega * m.mu0)
        H = eval_H(s, x[None])[0]
        assert np.linalg.norm(H - H_fd) / np.linalg.norm(H) < 1e-4

    def test_far_zone_impedance(self, small_sphere_solution):
        s = small_sphere_solution
        m = s.medium
        x = 100 / s.k * unit([0.2, 0.7, -0.3])
        Hs = eval_H(s, x[None])[0] - incident_curl(s.incident, s.k, x) / (1j * m.omega * m.mu0)
        Vs = eval_scattered(s, x[None])[0]
        assert np.linalg.norm(Hs) == pytest.approx(np.linalg.norm(Vs) * s.k / (m.omega * m.mu0), rel=0.02)

    def test_interior_rejected(self, small_sphere_solution):
        with pytest.raises(ParameterError):
            eval_H(small_sphere_solution, np.zeros((1, 3)))


class TestFarField:
    def test_zero_contrast(self, zero_solution):
        A = far_field(zero_solution, np.eye(3)).amplitude
        assert not np.any(A)

    def test_matches_large_r_evaluation(self, small_sphere_solution):
        s = small_sphere_solution
        r = 1000 / s.k
        dirs = np.array([unit([0.3, 0.4, 0.866]), unit([1, 0, 0]), unit([-0.2, 0.5, -0.7])])
        V = eval_scattered(s, r * dirs)
        A = far_field(s, dirs).amplitude
        approx = r * np.exp(-1j * s.k * r) * V
        assert np.abs(approx - A).max() / np.abs(A).max() < 1e-2

    def test_transversality(self, weak_sphere_solution):
        rule = sphere_rule(8, 16)
        A = far_field(weak_sphere_solution, rule.directions).amplitude
        ratio = np.abs(np.sum(A * rule.directions, axis=1)) / np.linalg.norm(A, axis=1)
        assert ratio.max() < 0.05

    def test_reciprocity(self, small_sphere_solution):
        s1 = small_sphere_solution
        d1, e1 = s1.incident.direction, s1.incident.polarization
        d2 = unit([0.4, -1.0, 0.3])
        e2 = unit(np.cross(d2, [1.0, 0.2, 0.5]))
        s2 = make_solution(sphere(0.5), 0.125, 2.0, incident=PlaneWave(d2, e2))
        a = e2 @ far_field(s1, -d2[None]).amplitude[0]
        b = e1 @ far_field(s2, -d1[None]).amplitude[0]
        assert abs(a - b) < 1e-2 * abs(a)

    def test_rejects_non_unit(self, small_sphere_solution):
        with pytest.raises(ParameterError):
            far_field(small_sphere_solution, np.array([[1.0, 1.0, 0.0]]))

    def test_sphere_rule_weights(self):
        r = sphere_rule(12, 24)
        assert r.weights.sum() == pytest.approx(4 * np.pi, rel=1e-14)
        assert np.allclose(np.linalg.norm(r.directions, axis=1), 1.0)
        # integrates cos^2(theta) exactly
        assert np.sum(r.weights * r.directions[:, 2] ** 2) == pytest.approx(4 * np.pi / 3, rel=1e-13)


class TestCrossSections:
    def test_zero_contrast(self, zero_solution):
        cs = cross_sections(zero_solution)
        assert cs.sigma_scat == 0 and cs.optical_theorem == 0

    def test_optical_theorem(self, small_sphere_solution):
        cs = cross_sections(small_sphere_solution)
        assert abs(cs.optical_theorem - cs.sigma_scat) / cs.sigma_scat < 0.05
        assert cs.label == "scattering"

    def test_rayleigh_limit(self):
        # the hat basis loses an O(h) boundary layer of polarizable volume, so
        # this needs a finer grid than the other checks (about -28% at 16 cells)
        a, eps = 0.3, 1.5
        s = make_solution(sphere(a), 2 * a / 40, eps, method="iterative", tol=1e-8)
        cs = cross_sections(s)
        ref = rayleigh_sigma(1.0, a, eps)
        assert abs(cs.sigma_scat - ref) / ref < 0.15

    def test_lossy_label(self):
        s = make_solution(sphere(0.5), 0.125, 2.0 + 0.5j)
        cs = cross_sections(s)
        assert cs.label.startswith("extinction")
        assert cs.optical_theorem > cs.sigma_scat

    def test_requires_unit_amplitude(self, small_sphere_solution):
        from vie3d.postprocess import FieldSolution
        s = small_sphere_solution
        scaled = FieldSolution(s.coefficients, s.system.with_rhs(s.system.b), s.report)
        object.__setattr__(scaled.system, "incident", s.incident.scaled(2))
        with pytest.raises(ParameterError):
            cross_sections(scaled)


class TestRadiation:
    def test_slope(self, small_sphere_solution):
        dirs = np.array([unit([1, 0, 0]), unit([0, 1, 1]), unit([-1, 0.3, 0.2])])
        rc = radiation_check(small_sphere_solution, dirs, [10, 30, 100, 300])
        assert rc["slope"] < -1
        assert rc["residual_times_r"].shape == (4, 3)

    def test_zero_contrast(self, zero_solution):
        rc = radiation_check(zero_solution, np.eye(3), [10, 20, 40])
        assert not np.any(rc["residual_times_r"])

    def test_radii_must_increase(self, small_sphere_solution):
        with pytest.raises(ParameterError):
            radiation_check(small_sphere_solution, np.eye(3), [10, 5])


def rotation_z90(v):
    v = np.asarray(v)
    return np.stack([-v[..., 1], v[..., 0], v[..., 2]], axis=-1)


class TestBoundaryDiagnostic:
    @pytest.mark.xfail(strict=True, reason="the interior sample at h/2 lies in the boundary layer where the "
                                           "hat reconstruction of E0 ramps to zero")
    def test_zero_contrast(self, zero_solution):
        bd = boundary_diagnostic(zero_solution, 32)
        assert bd["tangential"] < 1e-6 and bd["normal"] < 1e-6

    def test_reports_per_sample(self, small_sphere_solution):
        bd = boundary_diagnostic(small_sphere_solution, 16)
        assert bd["tangential_samples"].shape == (16,) and np.all(np.isfinite(bd["normal_samples"]))

    def test_rotation_invariance(self, small_sphere_solution):
        s = small_sphere_solution
        pw = s.incident
        rotated = make_solution(sphere(0.5), 0.125, 2.0,
                                incident=PlaneWave(rotation_z90(pw.direction), rotation_z90(pw.polarization)))
        a = boundary_diagnostic(s, 48)
        b = boundary_diagnostic(rotated, 48)
        assert b["tangential"] == pytest.approx(a["tangential"], rel=0.05)
