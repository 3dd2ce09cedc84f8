"""SSH chain Hamiltonians, Peierls dimerization and kink critical points."""

from .analysis import DecayFit, coercivity_scan, deviation, fit_decay, schatten_norm
from .energy import energy_total, gradient_residual, hessian_apply, hessian_matrix
from .lattice import (Closed, Configuration, DimerizedParams, Tail, Window, build_operator,
                      closed_ring, dimerized_configuration, heteroclinic_window, open_chain)
from .solvers import (CriticalPoint, SolverOptions, minimize_closed, solve_kink,
                      solve_periodic_dimerized)
from .spectral import eigendecompose, negative_projector, spectral_gap

__version__ = "0.1.0"
