"""Exception hierarchy shared by every module of the package."""


class ModIndepError(Exception):
    """Base class for all errors raised by this package."""


class NotHermitian(ModIndepError):
    pass


class NotPSD(ModIndepError):
    pass


class ShapeMismatch(ModIndepError, ValueError):
    pass


class NotPositiveOnAlgebra(ModIndepError):
    pass


class NotNormalized(ModIndepError):
    pass


class NotUnitVector(ModIndepError):
    pass


class NotInAlgebra(ModIndepError):
    pass


class NormNotAttainedPositively(ModIndepError):
    pass


class NotTernary(ModIndepError):
    pass


class AnchorNotUnit(ModIndepError):
    pass


class AnchorNotInModule(ModIndepError):
    pass


class AnchorNotShared(ModIndepError):
    pass


class ImageNotClosed(ModIndepError):
    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class MixedAlgebras(ModIndepError):
    pass


class DomainMismatch(ModIndepError):
    pass


class BadProblem(ModIndepError):
    pass


class AmbientNotFull(ModIndepError):
    pass


class DivisionByZero(ModIndepError, ZeroDivisionError):
    pass


class ScenarioError(ModIndepError):
    pass


class ParseError(ScenarioError):
    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class ValidationError(ScenarioError):
    pass


class CheckError(ScenarioError):
    pass


class UnknownScenario(ScenarioError, KeyError):
    def __init__(self, name, valid):
        self.name = name
        self.valid = list(valid)
        super().__init__(f"unknown scenario {name!r}; valid names: {', '.join(self.valid)}")

    def __str__(self):
        return self.args[0]
