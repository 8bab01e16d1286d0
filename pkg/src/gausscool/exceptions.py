"""Exception hierarchy shared by every module."""


class GaussCoolError(Exception):
    """Base class for all domain errors raised by :mod:`gausscool`."""


class InvalidInput(GaussCoolError, ValueError):
    """Malformed arguments: wrong shapes, out-of-range indices, bad parameters."""


class NumericalInconsistency(GaussCoolError, ArithmeticError):
    """A quantity that must be real or symmetric came out otherwise."""


class SynthesisInfeasible(GaussCoolError):
    """The tone matching has no solution for the requested target."""


class AmplitudeOverflow(GaussCoolError):
    """A modulation amplitude reached or exceeded 1."""

    def __init__(self, j, m, value):
        self.j, self.m, self.value = j, m, value
        super().__init__(f"modulation amplitude eta[{j}, {m}] = {value:.6g} >= 1")


class CorrectionBreakdown(GaussCoolError):
    """The corrected couplings no longer define a cooling operator."""


class ComplexityRefusal(GaussCoolError):
    """Enumeration request too large without an explicit override."""


class DegenerateDispersion(GaussCoolError):
    """Two normal modes share a frequency."""

    def __init__(self, k1, k2, message=None):
        self.k1, self.k2 = k1, k2
        super().__init__(message or f"normal modes k={k1} and k={k2} are degenerate")


class NoUniqueSteadyState(GaussCoolError):
    """The drift matrix is not Hurwitz."""
