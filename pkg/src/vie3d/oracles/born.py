"""First Born iterate ``E0 + T E0 + gamma Q E0`` on the discrete model.

The incident field enters through its Gram projection onto the hat basis;
the scattered part is then evaluated exactly as for a solved system, so the
only difference from the full solver is the missing linear solve.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse.linalg as spla

from ..assembly import GalerkinSystem, build_basis, project
from ..medium import incident_field
from ..postprocess import FieldSolution, eval_scattered
from ..quadrature import QuadratureRule

__all__ = ["born_solution", "born_field"]


def born_solution(grid, medium, incident, rule: QuadratureRule = QuadratureRule()) -> FieldSolution:
    """Coefficients ``Gram^-1 <E0, phi>`` wrapped as a :class:`FieldSolution`."""
    basis = build_basis(grid)
    b = project(basis, lambda x: incident_field(incident, medium.k, x))
    lu = spla.splu(basis.gram.tocsc().astype(complex))
    c0 = np.concatenate([lu.solve(bi) for bi in b])
    system = GalerkinSystem(basis, medium, None, b.reshape(-1), incident)
    return FieldSolution(c0, system, None, rule)


def born_field(grid, medium, incident, x, rule: QuadratureRule = QuadratureRule()):
    """Born-approximation total field at points ``x`` (shape ``(N, 3)`` or ``(3,)``)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    E0 = incident_field(incident, medium.k, x)
    if medium.zero_contrast:
        return E0
    return E0 + eval_scattered(born_solution(grid, medium, incident, rule), x)
