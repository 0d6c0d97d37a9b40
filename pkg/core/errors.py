class OrbitError(Exception):
    """Base class for every error raised by the verifier."""


class ScheduleError(OrbitError):
    pass


class BasisError(OrbitError):
    pass


class WitnessError(OrbitError):
    pass


class SolverError(OrbitError):
    pass


class UnboundedError(SolverError):
    pass


class InfeasibleError(SolverError):
    pass


class PrecisionError(SolverError):
    """Duality gap did not close at the requested precision."""


class SuiteError(OrbitError):
    pass


class BudgetError(OrbitError):
    """A requested computation exceeds the configured step budget."""
