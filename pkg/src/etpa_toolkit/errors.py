"""Exception hierarchy shared by all toolkit modules."""


class EtpaError(Exception):
    """Base class for toolkit errors."""


class DimensionError(EtpaError, ValueError):
    """Operation mixes incompatible physical dimensions."""

    def __init__(self, got, expected):
        self.got = got
        self.expected = expected
        super().__init__(f"dimension mismatch: got {got!r}, expected {expected!r}")


class UnitSystemError(EtpaError, ValueError):
    """cgs and SI quantities were combined in a formula that needs one system."""


class DomainError(EtpaError, ValueError):
    """Input outside the mathematical or physical domain of an operation."""


class ParseError(EtpaError, ValueError):
    """Malformed input text. Carries a location when one is known."""

    def __init__(self, message, *, offset=None, row=None, column=None):
        self.offset = offset
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        if offset is not None:
            where.append(f"offset {offset}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)


class ValidationError(EtpaError, ValueError):
    """Parsed data violates a table invariant."""


class RangeError(EtpaError, ValueError):
    """Requested point lies outside a tabulated grid (no extrapolation)."""


class SingularityError(EtpaError, ArithmeticError):
    """A linear system is singular or a level set is unreachable."""

    def __init__(self, message, levels=()):
        self.levels = tuple(levels)
        super().__init__(message)


class ConfigError(EtpaError, ValueError):
    """Invalid run configuration; ``path`` names the offending field."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")
