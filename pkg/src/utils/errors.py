from pathlib import Path
from typing import Optional, Union


class TrackingError(Exception):
    """Base class for every error raised by the tracking engine."""


class DomainError(TrackingError, ValueError):
    """Numeric input outside the domain of an operation (NaN, negative distance, ...)."""


class StateError(TrackingError, RuntimeError):
    """Operation requested on an object that cannot serve it (empty model, empty gallery)."""


class ContractViolation(StateError):
    """A caller broke a documented precondition."""


class InputError(TrackingError, ValueError):
    """Bad user input: files, configuration, frame ordering."""


class ParseError(InputError):
    """Malformed row in an input file."""

    def __init__(self, message: str, path: Optional[Union[str, Path]] = None, line_number: Optional[int] = None):
        self.path = str(path) if path is not None else None
        self.line_number = line_number
        location = ""
        if self.path is not None:
            location = f"{self.path}"
            if line_number is not None:
                location += f":{line_number}"
            location += ": "
        super().__init__(f"{location}{message}")
