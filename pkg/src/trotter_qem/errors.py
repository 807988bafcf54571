"""Exception hierarchy shared by the simulator, estimators and harness."""


class QemError(ValueError):
    """Base class for every error raised by this package."""


class NonHermitianInput(QemError):
    pass


class NonHermitianObservable(QemError):
    pass


class DimensionMismatch(QemError):
    pass


class InvalidQubitCount(QemError):
    pass


class InvalidTrotterNumber(QemError):
    pass


class InvalidRate(QemError):
    pass


class UnsupportedSupportSize(QemError):
    pass


class DuplicateNode(QemError):
    pass


class SignMismatch(QemError):
    pass


class ZeroValue(QemError):
    pass


class InsufficientGrid(QemError):
    pass


class DegenerateLambdas(QemError):
    pass


class ZeroTrotter(QemError):
    pass


class LengthMismatch(QemError):
    pass


class DegenerateDenominator(QemError):
    pass


class OutOfRange(QemError):
    pass


class InvalidShots(QemError):
    pass


class InsufficientShots(QemError):
    pass


class ConfigError(QemError):
    """Invalid experiment configuration; ``line`` points into the source file."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)


class ArtifactWriteError(OSError):
    """An output artifact could not be written."""

    def __init__(self, path, reason: str):
        self.path = str(path)
        super().__init__(f"cannot write {self.path}: {reason}")
