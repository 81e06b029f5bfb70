"""Higher-order fractional Laplacians (-Lap)^s, s = k + s0, on intervals and
balls: pointwise and FFT evaluation, exact solutions, boundary traces, a 1D
Dirichlet solver and executable Pohozaev-type identities."""
from .specfun import DomainError, FracOrder, gamma, riesz_constant, riesz_far_constant
from .domains import DomainSpec
from .exact_solutions import BallSolution, ball_coefficient, ball_solution, dyda_forward, dyda_polynomial
from .frlap_eval import Field, GridField, QuadratureSpec, fft_frlap, frlap_compose, frlap_point
from .boundary_trace import LogFit, boundary_trace, log_singularity_fit
from .identity_suite import (Bump, DilationModel, IdentityReport, NonlinearitySpec, dilation_derivative,
                             intbyparts_check, pohozaev_check, scaling_identity_check, semilinear_pohozaev)

__version__ = "0.1.0"
