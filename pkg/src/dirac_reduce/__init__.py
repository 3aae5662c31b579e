"""Spectral finite-dimensional reduction for Dirac-type action functionals.

Fields f: M -> W = V / lattice on M = T^r or SU(2), where V carries r
anti-commuting complex structures.  Critical points of

    A_H(f) = 1/2 <Dirac f, f> - integral of H(t, f(t))

are found by reducing to a finite-dimensional generating function.
"""
__version__ = "0.1.0"

from .clifford import CliffordModule, build_module, minimal_dimension, radon_hurwitz_bound
from .exceptions import (
    ConfigError,
    ContractionError,
    DiracReduceError,
    DomainMismatchError,
    FixedPointNotConvergedError,
    FrequencyBelowCutoffError,
    InvalidModuleError,
    NotHyperkahlerError,
    RefinementDivergedError,
    ZeroFrequencyError,
)
from .hamiltonian import ConstTime, SU2Time, Term, TorusTime, TrigHamiltonian, min_truncation
from .reduction import (
    ReducedPoint,
    ReducedProblem,
    action_quadratic,
    action_total,
    evaluate,
    generating_grad,
    generating_hess,
    generating_value,
    residual,
    solve_fiber,
)
from .solver import (
    CountReport,
    CriticalPointRecord,
    SearchParams,
    classify,
    count_report,
    find_critical_points,
    refine_and_verify,
)
from .su2 import SU2Field
from .torus import TorusField

