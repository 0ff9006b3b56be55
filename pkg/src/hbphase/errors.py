"""Exception hierarchy shared by every module."""


class HBError(Exception):
    """Base class for all package errors."""


class InvalidHamiltonian(HBError, ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        msg = "; ".join(str(v) for v in self.violations) or "invalid Hamiltonian"
        super().__init__(msg)


class NumericError(HBError, ArithmeticError):
    """A numerical routine produced an untrustworthy result."""


class ConvergenceError(NumericError):
    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial


class PairingError(NumericError):
    """Spectrum does not split into (E, -E) pairs: the matrix is not an HB matrix."""


class PreconditionError(HBError, ValueError):
    """Inputs lie outside the region where an operation is defined."""


class AtExceptionalPoint(PreconditionError):
    """Parameters sit at (or beyond) the exceptional point of the branch."""


class TruncationError(NumericError):
    """Fock truncation leaves more norm outside the basis than allowed."""
