"""Simulator and analytical propagators for the one-dimensional Dirac quantum cellular automaton."""
from .core import (DomainError, FieldState, MassParameter, Spinor, delta_state, evolve,
                   make_mass, random_state, step, transition_matrices)
from .pathsum import (ChannelIndex, PathTally, PropagatorKernel, alpha, coefficient,
                      compose_ab, evolve_via_kernel, kernel)
from .closedform import jacobi_eval, JacobiSpec, kernel_closedform, reconcile_paper_prefactors
from .spectral import dispersion, evolve_spectral, momentum_matrix
from .oracle import PathString, classify, is_forbidden, kernel_bruteforce, product, structure_check

__version__ = "0.1.0"
