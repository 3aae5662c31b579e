"""Exception hierarchy shared by all modules."""


class DiracReduceError(Exception):
    """Base class for errors raised by this package."""


class InvalidModuleError(DiracReduceError, ValueError):
    """A requested or supplied Clifford module is malformed."""


class NotHyperkahlerError(InvalidModuleError):
    """An operation needs J1 J2 = J3 and r = 3."""


class DomainMismatchError(DiracReduceError, ValueError):
    """A time point does not belong to the Hamiltonian's time domain."""


class ZeroFrequencyError(DiracReduceError, ValueError):
    """The Dirac block is requested for the kernel (constant) mode."""


class FrequencyBelowCutoffError(DiracReduceError, ValueError):
    """A tail operation received modes below the truncation degree."""


class ContractionError(DiracReduceError, RuntimeError):
    """The fiber map is not (or is measured not to be) a contraction."""


class FixedPointNotConvergedError(DiracReduceError, RuntimeError):
    """Picard iteration hit the iteration cap."""


class RefinementDivergedError(DiracReduceError, RuntimeError):
    """Newton at the refined truncation failed to converge."""


class ConfigError(DiracReduceError, ValueError):
    """A run configuration is invalid."""
