"""
Exception hierarchy shared by the library and the command-line driver.
"""

from typing import Optional, Tuple


class ViewingEEGError(Exception):
    """Base class for every error raised by ViewingEEG. `exit_code` is what the CLI returns."""
    exit_code = 3


class ParameterError(ViewingEEGError, ValueError):
    """An argument or configuration value violates a precondition."""
    exit_code = 2


class StructuralError(ViewingEEGError, ValueError):
    """Data does not have the shape or labels the paradigm requires."""
    exit_code = 3


class DataFileError(StructuralError):
    """
    A problem tied to a file on disk: missing, unreadable, or holding invalid samples.

    Args:
        message (str): What went wrong.
        path (str, optional): The offending file.
        location (tuple, optional): (row, column) inside the file, when known.
    """

    def __init__(self, message: str, path: Optional[str] = None,
                 location: Optional[Tuple[int, str]] = None):
        self.path = path
        self.location = location
        text = message
        if path is not None:
            text = f"{text} [file: '{path}'"
            if location is not None:
                text += f", row {location[0]}, column '{location[1]}'"
            text += "]"
        super().__init__(text)


class DegenerateInputError(ViewingEEGError, ValueError):
    """Input is well-formed but numerically degenerate (e.g. zero total power)."""
    exit_code = 4


class ConvergenceError(ViewingEEGError, RuntimeError):
    """An iterative solver hit its iteration cap. `residual` is the last KKT gap."""
    exit_code = 4

    def __init__(self, message: str, residual: float = float("nan"), n_iter: int = 0):
        self.residual = residual
        self.n_iter = n_iter
        super().__init__(f"{message} (KKT residual {residual:.3e} after {n_iter} iterations)")
