"""Exception hierarchy.

Every error carries a short machine-readable ``category`` and a distinct
``exit_code`` so the CLI can report failures in a parsable way.
"""

from __future__ import annotations


class PisteError(Exception):
    category = "error"
    exit_code = 1


# geometry
class PointAtInfinity(PisteError):
    category = "point_at_infinity"
    exit_code = 10


class SingularMatrix(PisteError):
    category = "singular_matrix"
    exit_code = 11


class DegenerateConfiguration(PisteError):
    category = "degenerate_configuration"
    exit_code = 12


class InsufficientData(PisteError):
    category = "insufficient_data"
    exit_code = 13


# features / masking
class BorderViolation(PisteError):
    category = "border_violation"
    exit_code = 20


class DimensionMismatch(PisteError):
    category = "dimension_mismatch"
    exit_code = 21


# robust estimation
class NoConsensus(PisteError):
    category = "no_consensus"
    exit_code = 30


class AllDegenerate(PisteError):
    category = "all_degenerate"
    exit_code = 31


# tracking
class InvalidBox(PisteError):
    category = "invalid_box"
    exit_code = 40


class LostTarget(PisteError):
    category = "lost_target"
    exit_code = 41

    def __init__(self, message: str, score: float = float("nan"), previous=None):
        super().__init__(message)
        self.score = score
        self.previous = previous


class ParseError(PisteError):
    category = "parse_error"
    exit_code = 42

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)
        self.line = line
        self.column = column


class NonMonotonicFrames(PisteError):
    category = "non_monotonic_frames"
    exit_code = 43


class MissingFrame(PisteError):
    category = "missing_frame"
    exit_code = 44


# synthetic / evaluation
class ConfigError(PisteError):
    category = "config_error"
    exit_code = 50


class LengthMismatch(PisteError):
    category = "length_mismatch"
    exit_code = 51


# io
class EmptyDirectory(PisteError):
    category = "empty_directory"
    exit_code = 60


class DecodeError(PisteError):
    category = "decode_error"
    exit_code = 61


class IoError(PisteError):
    category = "io_error"
    exit_code = 62
