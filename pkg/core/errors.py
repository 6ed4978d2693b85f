"""
Exception hierarchy for qglnn
"""


class QglnnError(ValueError):
    """Base class for every error raised by the engine"""


class DivisionByZeroError(QglnnError, ZeroDivisionError):
    pass


class VariableMismatchError(QglnnError):
    pass


class SingularMatrixError(QglnnError):
    pass


class IndexRangeError(QglnnError):
    pass


class NonRationalExponentError(QglnnError):
    pass


class NonIntegerAlphaError(QglnnError):
    pass


class UnknownPairError(QglnnError):
    """Raised when two fields have no entry in the contraction table"""


class WindowTooLargeError(QglnnError):
    pass


class ResidualPhaseError(QglnnError):
    """A relation residual kept a phase that should have cancelled"""


class UnknownModuleError(QglnnError):
    """Unknown module family, submodule selector or closed formula"""


class NonConstantError(QglnnError):
    pass


class ConfigError(QglnnError):
    """Invalid run configuration"""
