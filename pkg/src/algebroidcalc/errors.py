"""Exception types shared across the engine."""


class AlgebroidCalcError(Exception):
    """Base class for all engine errors."""


class DeclarationError(AlgebroidCalcError):
    """A symbol was used that is not declared on the chart at hand."""


class ChartMismatchError(AlgebroidCalcError):
    """Two values that must live on the same chart do not."""


class ConventionError(AlgebroidCalcError):
    """A construction violates a grading convention (parity mismatch etc.)."""


class ProjectorError(AlgebroidCalcError):
    """An argument fed to a derived bracket is not in the abelian subalgebra."""


class CalibrationError(AlgebroidCalcError):
    """Two routes that must agree by calibration disagree; names the identity."""

    def __init__(self, identity: str, message: str = ""):
        self.identity = identity
        super().__init__(f"calibration fault in {identity}" + (f": {message}" if message else ""))


class ProblemError(AlgebroidCalcError):
    """A problem file failed to parse or validate; carries a location."""

    def __init__(self, message: str, line: int, col: int):
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {message}")
