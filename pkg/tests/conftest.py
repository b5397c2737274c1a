import numpy as np
import pytest
from hypothesis import settings

from vie3d import MediumParams, PlaneWave, assemble, box, build_basis, solve, sphere, voxelize
from vie3d.postprocess import FieldSolution

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")


def make_solution(shape, h, eps_rel, k=1.0, incident=None, method="auto", node_rule="cells", **kw):
    incident = PlaneWave([0, 0, 1], [1, 0, 0]) if incident is None else incident
    grid = voxelize(shape, h, node_rule=node_rule)
    basis = build_basis(grid)
    medium = MediumParams.from_wavenumber(k, eps_rel)
    system = assemble(grid, basis, medium, incident)
    c, report = solve(system, method, **kw)
    return FieldSolution(c, system, report)


@pytest.fixture(scope="session")
def small_sphere_solution():
    """epsilon_r = 2 sphere, ka = 0.5, 8 cells per diameter (dense solve)."""
    return make_solution(sphere(0.5), 0.125, 2.0)


@pytest.fixture(scope="session")
def weak_sphere_solution():
    """epsilon_r = 1.1 sphere, ka = 0.5, 12 cells per diameter."""
    return make_solution(sphere(0.5), 1.0 / 12, 1.1)


@pytest.fixture(scope="session")
def cube_system():
    """5^3 interior nodes of a cube, epsilon_r = 2."""
    grid = voxelize(box([0, 0, 0], [0.6, 0.6, 0.6]), 0.1)
    basis = build_basis(grid)
    medium = MediumParams.from_wavenumber(2.0, 2.0)
    return assemble(grid, basis, medium, PlaneWave([1, 0, 0], [0, 1, 0]))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
