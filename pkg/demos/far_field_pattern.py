"""
Far-field pattern of a sphere
=============================

Far-field amplitudes in the two principal planes, compared with the Mie
series. The pattern shape converges faster than the total cross section.
"""

import numpy as np

from vie3d import MediumParams, PlaneWave, solve_scattering, sphere
from vie3d.oracles import mie_far_field, mie_solution
from vie3d.postprocess import far_field

a, eps = 0.5, 2.0
medium = MediumParams.from_wavenumber(1.0, eps)
incident = PlaneWave([0, 0, 1], [1, 0, 0])
sol = solve_scattering(sphere(a), 2 * a / 16, medium, incident, method="iterative", preconditioner="gram")
mie = mie_solution(a, eps, 1.0)

theta = np.linspace(0, np.pi, 7)
for name, plane in (("E-plane (xz)", lambda t: np.stack([np.sin(t), 0 * t, np.cos(t)], 1)),
                    ("H-plane (yz)", lambda t: np.stack([0 * t, np.sin(t), np.cos(t)], 1))):
    dirs = plane(theta)
    A = np.linalg.norm(far_field(sol, dirs).amplitude, axis=1)
    R = np.linalg.norm(mie_far_field(mie, dirs, incident), axis=1)
    print(name)
    for t, x, y in zip(np.degrees(theta), A, R):
        print(f"  theta={t:5.1f}  |A|={x:.4e}  Mie={y:.4e}  ratio={x / y:.3f}")

###############################################################################
# The ratio is nearly constant across angles: the discretization mostly
# rescales the induced dipole moment rather than distorting the pattern.
