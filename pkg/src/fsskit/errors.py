"""Exception types raised across the toolkit."""


class FssError(Exception):
    """Base class for all toolkit errors."""


class DomainError(FssError, ValueError):
    """An input violates the physical or mathematical domain of an operation."""


class EvanescentModeError(DomainError):
    """The requested line section does not support a propagating mode."""


class SingularNetworkError(FssError):
    """ABCD-to-S conversion hit a zero denominator."""


class BandExtractionError(FssError):
    """Passband metrics could not be extracted from a response curve."""


class BandNotBracketedError(BandExtractionError):
    """The transmission peak sits on the grid boundary (or the curve is flat)."""


class OneSidedBandError(BandExtractionError):
    """A -3 dB crossing is missing on one side of the peak."""

    def __init__(self, side: str):
        self.side = side
        super().__init__(f"no -3 dB crossing found on the {side} side of the peak")


class InfeasibleSpecError(FssError, ValueError):
    """A synthesis target cannot be met by any parameter choice."""


class InfeasibleTargetError(InfeasibleSpecError):
    """A search target lies outside the achievable range."""

    def __init__(self, message: str, achievable: tuple[float, float] | None = None):
        self.achievable = achievable
        super().__init__(message)


class TouchstoneError(FssError, ValueError):
    """A Touchstone file could not be parsed."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class ConfigError(FssError, ValueError):
    """A run configuration is missing, malformed, or inconsistent."""
