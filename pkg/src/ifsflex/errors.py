"""Exception hierarchy shared by all modules."""


class IFSError(Exception):
    """Base class for errors raised by ifsflex."""


class EnumerationTooLarge(IFSError, ValueError):
    def __init__(self, count, cap):
        super().__init__(f"enumeration too large: {count} words exceeds cap {cap}")
        self.count = count
        self.cap = cap


class DomainError(IFSError, ValueError):
    """A point lies outside the domain interval of a system."""


class NoRootError(IFSError, ArithmeticError):
    pass


class ConvergenceError(IFSError, ArithmeticError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DegenerateSystemError(IFSError, ValueError):
    pass


class SpectrumDomainError(IFSError, ValueError):
    pass


class PeelingPrecisionError(IFSError, ArithmeticError):
    def __init__(self, message, entry, partial):
        super().__init__(message)
        self.entry = entry
        self.partial = partial


class InadmissibleTripleError(IFSError, ValueError):
    def __init__(self, message, lhs, rhs):
        super().__init__(message)
        self.lhs = lhs
        self.rhs = rhs


class SchemaError(IFSError, ValueError):
    """Malformed system description."""
