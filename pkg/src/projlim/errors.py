"""Exception hierarchy for projlim."""


class ProjlimError(Exception):
    """Base class for all library errors."""


class InvalidIntervalError(ProjlimError, ValueError):
    pass


class InvalidPartitionError(ProjlimError, ValueError):
    pass


class DimensionError(ProjlimError, ValueError):
    pass


class NumericError(ProjlimError, ArithmeticError):
    pass


class DomainError(ProjlimError, ValueError):
    pass


class UnsupportedBaseMeasureError(ProjlimError, ValueError):
    pass


class UnsupportedPartitionError(ProjlimError, ValueError):
    pass


class DegenerateFamilyError(ProjlimError, ValueError):
    pass


class NotARefinementError(ProjlimError, ValueError):
    pass


class EmptySampleError(ProjlimError, ValueError):
    pass


class ConfigError(ProjlimError, ValueError):
    pass
