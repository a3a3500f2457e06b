"""Exception hierarchy shared by every archex module."""


class ArchexError(Exception):
    """Base class for all errors raised by archex."""


# design space

class DesignSpaceError(ArchexError):
    pass


class EmptySettings(DesignSpaceError):
    pass


class DuplicateName(DesignSpaceError):
    pass


class NonAscendingSettings(DesignSpaceError):
    pass


class DuplicateSetting(DesignSpaceError):
    pass


class UnknownParameter(DesignSpaceError):
    pass


class InvalidSetting(DesignSpaceError):
    """A value is not a member of its parameter's settings list."""


class OverlappingDomains(DesignSpaceError):
    pass


class IncompleteCoverage(DesignSpaceError):
    pass


# metrics and objective

class MetricsError(ArchexError):
    pass


class NonPositiveMetric(MetricsError):
    pass


class WeightOutOfRange(MetricsError):
    pass


class WeightsDoNotSumToOne(MetricsError):
    pass


# evaluation

class EvaluationFailed(ArchexError):
    """An evaluator could not produce metrics for a configuration.

    ``command`` carries the rendered command line when the failure came
    from an external process.
    """

    def __init__(self, message, command=None):
        super().__init__(message)
        self.command = command

    def __str__(self):
        msg = super().__str__()
        if self.command:
            return f"{msg} [command: {self.command}]"
        return msg


class SpawnFailed(EvaluationFailed):
    pass


class NonZeroExit(EvaluationFailed):
    pass


class EvaluationTimeout(EvaluationFailed):
    pass


class ResultFileMissing(EvaluationFailed):
    pass


class ResultParseError(EvaluationFailed):
    pass


# cost model

class MissingParameter(ArchexError):
    pass


class UnknownCategory(ArchexError):
    pass


# oracle / analysis

class BudgetExceeded(ArchexError):
    pass


class EmptyInput(ArchexError):
    pass


class SolutionNotInRecords(ArchexError):
    pass


class MismatchedRun(ArchexError):
    pass


# run configuration

class ConfigError(ArchexError):
    """Base for run-configuration problems; ``location`` is a JSON path."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location

    def __str__(self):
        msg = super().__str__()
        if self.location:
            return f"{self.location}: {msg}"
        return msg


class ParseError(ConfigError):
    pass


class ValidationError(ConfigError):
    def __init__(self, message, location=None, cause=None):
        super().__init__(message, location)
        self.cause = cause
