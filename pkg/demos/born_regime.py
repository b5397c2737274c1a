"""
Weak scatterers and the Born approximation
==========================================

For a contrast close to zero the full solution approaches the first-order
(Born) field. The relative gap on the scattered part shrinks in proportion
to the contrast.
"""

import numpy as np

from vie3d import MediumParams, PlaneWave, incident_field, solve_scattering, sphere
from vie3d.oracles import born_field
from vie3d.postprocess import eval_scattered

incident = PlaneWave([0, 0, 1], [1, 0, 0])
rng = np.random.default_rng(0)
probes = rng.normal(size=(20, 3))
probes *= (2.0 / np.linalg.norm(probes, axis=1))[:, None]

for eps in (1.1, 1.01, 1.001):
    medium = MediumParams.from_wavenumber(1.0, eps)
    sol = solve_scattering(sphere(0.5), 1 / 12, medium, incident)
    V_full = eval_scattered(sol, probes)
    V_born = born_field(sol.grid, medium, incident, probes) - incident_field(incident, 1.0, probes)
    gap = np.linalg.norm(V_full - V_born) / np.linalg.norm(V_full)
    print(f"eps_r={eps:<6} relative Born gap {gap:.2e}")
