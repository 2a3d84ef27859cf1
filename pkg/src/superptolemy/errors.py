"""Exception hierarchy shared by all modules."""


class SuperPtolemyError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(SuperPtolemyError):
    """Input data is structurally invalid (CLI exit code 1)."""


class NumericError(SuperPtolemyError):
    """A numerical or algebraic operation could not be carried out (exit code 2)."""


# scalars
class DivisionByZero(NumericError, ZeroDivisionError):
    pass


class ZeroPolynomial(NumericError):
    pass


# grassmann / osp21
class RankMismatch(SuperPtolemyError):
    pass


class NotInvertible(NumericError):
    pass


class NotOSp(NumericError):
    pass


class NotUnimodular(NumericError):
    pass


class DegeneratePair(NumericError):
    pass


# triangulation
class TriangulationSyntaxError(ValidationError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class GluingNotInvolutive(ValidationError):
    pass


class NotOrdered(ValidationError):
    pass


class SlotOutOfRange(ValidationError):
    pass


class NotManifold(ValidationError):
    pass


class NotClosed(ValidationError):
    pass


# ptolemy
class SigmaNotCocycle(ValidationError):
    pass


class SingularJacobian(NumericError):
    pass


class NoConvergence(NumericError):
    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = list(trace)


class ResidualNonzero(NumericError):
    pass


class NotComposable(ValidationError):
    pass


class NotGeneric(NumericError):
    pass


# oneloop
class ChoiceInvalid(ValidationError):
    pass


class WeightsMissing(ValidationError):
    pass


# pachner
class NotAdjacent(ValidationError):
    pass


class OrderingObstruction(ValidationError):
    pass


class DegenerateTransport(NumericError):
    pass
