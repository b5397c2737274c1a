"""
Conditioning against the contrast
=================================

The system matrix is ``Gram - p S + gamma D``. At zero contrast it is the
Gram matrix, whose condition number stays below 27. Large contrasts bring
in the gradient operator ``D`` and the condition number grows.
"""

import numpy as np

from vie3d import MediumParams, PlaneWave, assemble, build_basis, solve_iterative, sphere, voxelize

grid = voxelize(sphere(0.5), 0.125)
basis = build_basis(grid)
incident = PlaneWave([0, 0, 1], [1, 0, 0])
print(f"M = {basis.M} hats, {3 * basis.M} unknowns")

for eps in (1.0, 1.5, 2.0, 4.0, 8.0, 16.0, 4.0 + 2.0j):
    medium = MediumParams.from_wavenumber(1.0, eps)
    system = assemble(grid, basis, medium, incident)
    cond = np.linalg.cond(system.dense())
    _, plain = solve_iterative(system, tol=1e-8)
    _, gram = solve_iterative(system, tol=1e-8, preconditioner="gram")
    print(f"eps_r={str(eps):<8} cond={cond:9.3e}  GMRES iterations: {plain.iterations:3d} plain, "
          f"{gram.iterations:3d} Gram-preconditioned")
