"""Exception hierarchy shared by every layer of the engine."""


class EngineError(Exception):
    """Base class for all errors raised by the engine."""


class ParseError(EngineError):
    def __init__(self, message, line=1, column=1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class MalformedTermError(EngineError):
    """An index name occurs more than twice in one term, or a dummy pair is ill-formed."""


class InconsistentSumError(EngineError):
    """Terms of a sum carry different free indices."""


class OutOfIndicesError(EngineError):
    """The dummy-name pool ran out of fresh names."""


class RuleShapeError(EngineError):
    """Pattern and template of a rule disagree on their free indices."""


class PropertyError(EngineError):
    """Bad property declaration (unknown property/option, wrong rank, conflicts)."""


class NoValuesError(PropertyError):
    """An abstract index was asked for concrete values."""


class UndefinedValueError(EngineError):
    """Division by a syntactic zero."""


class UnsupportedIntegralError(EngineError):
    pass


class UnknownFunctionError(EngineError):
    pass


class SingularMetricError(EngineError):
    pass


class MissingPropertyError(EngineError):
    pass


class CannotEnumerateError(EngineError):
    """An index without declared values was found during component evaluation."""


class UnknownHeadError(EngineError):
    """A tensor head has no component assignment."""


class NotScalarError(EngineError):
    pass


class UnknownLabelError(EngineError):
    pass


class UnknownOperationError(EngineError):
    pass


class CanonicalisationLimitError(EngineError):
    """A term carries more indices than exhaustive canonicalisation supports."""


class StatementError(EngineError):
    """An error raised while running one script statement, with its location."""

    def __init__(self, message, line=1, statement=""):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.statement = statement
