"""Independent reference computations used by tests and validation runs."""
from .mie import MieSolution, MieTruncationWarning, mie_far_field, mie_solution, rayleigh_sigma
from .born import born_field, born_solution
from .fd import curl_curl, helmholtz_residual
