"""Modified Leggett-Garg correlators for a harmonic oscillator watched by a
waiting detector at the origin."""
from .correlators import (CorrelatorValue, DwellMethod, DwellTime, dwell_time_sq,
                          eigenstate_cos_coefficients, f12sq_element, f12sq_eigenstate_closed,
                          f12sq_expectation, f12sq_p1_closed, standard_correlator_map)
from .coupling import (CouplingSpec, MatrixElementTable, TimeWindow, delta_matrix_elements,
                       gaussian_matrix_elements, matrix_elements)
from .errors import (CouplingError, DomainError, DwellTimeError, MlgError, SeriesError,
                     TruncationError, WindowMismatchError, ZeroNormError)
from .inequalities import (InequalityFamily, InequalityReport, lg2_two_time_delta, mlg3_evaluate,
                           mlg4_evaluate, stationary_kernels, trajectory_probability_pair)
from .optimizer import SearchDomain, optimize_coherent, sweep_grid
from .oscillator import (OscillatorConfig, StateVector, TruncationPolicy, coherent_amplitudes,
                         fock_state, momentum_state)
from .sca import CorrelatorCurve, default_grid, oscillatory_part, sca_plausible, turnaround_time

__version__ = "0.1.0"
