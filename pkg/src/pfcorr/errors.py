"""Exception hierarchy shared by all pfcorr modules."""


class PfcorrError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(PfcorrError, ValueError):
    pass


class DomainError(PfcorrError, ValueError):
    pass


class SizeError(PfcorrError, ValueError):
    pass


class AntisymmetryError(PfcorrError, ValueError):
    pass


class SingularityError(PfcorrError, ArithmeticError):
    pass


class ConfigurationError(PfcorrError, ValueError):
    pass


class ConsistencyError(PfcorrError, ArithmeticError):
    """An internal cross-check between two assembly paths failed."""


class DegeneracyError(PfcorrError, ArithmeticError):
    """The weight does not admit the requested skew-orthogonal family."""


class NumericError(PfcorrError, ArithmeticError):
    pass
