"""Exception hierarchy shared by every stage of the pipeline."""


class MrnError(Exception):
    """Base class for all errors raised by this package."""


class SourceSyntaxError(MrnError):
    """Malformed Solidity input."""

    def __init__(self, message, line, column, path=None):
        self.line = line
        self.column = column
        self.path = path
        where = f"{path}:" if path else ""
        super().__init__(f"{where}{line}:{column}: {message}")


class EncodingError(MrnError):
    """Source bytes are not valid UTF-8."""


class FormatError(MrnError):
    """An interchange file (AST, graph, checkpoint) does not match its schema."""

    def __init__(self, message, path="$"):
        self.json_path = path
        super().__init__(f"{path}: {message}")


class VersionError(FormatError):
    """Unknown format tag."""


class ShapeMismatch(MrnError, ValueError):
    pass


class NumericError(MrnError, FloatingPointError):
    pass


class DoubleBackward(MrnError, RuntimeError):
    pass


class EmptyCorpus(MrnError, ValueError):
    pass


class LengthMismatch(MrnError, ValueError):
    pass


class EmptyDataset(MrnError, ValueError):
    pass


class EmptyTrainSet(EmptyDataset):
    pass


class DegenerateLabels(MrnError, ValueError):
    pass


class TrainingAborted(MrnError):
    """A numeric failure stopped training; ``epoch`` records where."""

    def __init__(self, epoch, cause):
        self.epoch = epoch
        self.cause = cause
        super().__init__(f"training aborted at epoch {epoch}: {cause}")
