"""Exception types raised across the pipeline.

Every failure mode has a dedicated class so callers (and the CLI) can map
errors to exit behaviour without string matching.
"""


class MarketGNNError(Exception):
    """Base class for all package errors."""


class ParseError(MarketGNNError):
    """Malformed input file content (carries a line number when known)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(MarketGNNError):
    """Input violates a domain invariant (non-positive price, duplicate date...)."""


class UniverseTooSmallError(MarketGNNError):
    """Fewer than two tickers survive alignment."""


class InsufficientHistoryError(MarketGNNError):
    """Time axis too short for the requested features, labels, or windows."""


class WindowInvalidError(MarketGNNError):
    """A sequence window touches an invalid (masked) position."""


class IntegrityError(MarketGNNError):
    """Graph file references a missing node or repeats an id."""


class SchemaError(MarketGNNError):
    """Unknown node/edge type, unknown key, or corrupt report structure."""


class ResolutionConflictError(MarketGNNError):
    """A same-company edge joins nodes of different node_type."""


class UnknownTickerError(MarketGNNError):
    """A universe ticker is absent from the graph."""


class ConfigurationError(MarketGNNError):
    """Invalid configuration value or unknown option."""


class ContractError(MarketGNNError):
    """Caller violated an operation contract (shape mismatch, stale trace...)."""


class NumericError(MarketGNNError):
    """Non-finite value crossed a layer boundary."""


class NoDataError(MarketGNNError):
    """An operation received an empty anchor or sample set."""


class ZeroVarianceError(MarketGNNError):
    """Sharpe ratio undefined: return series has zero variance."""


class InsufficientDataError(MarketGNNError):
    """Metric needs more observations than provided."""


class BankruptcyError(MarketGNNError):
    """A return at or below -100% makes compounding undefined."""


class EmptyGraphError(MarketGNNError):
    """Summary requested for a graph with no nodes."""


class ModeError(MarketGNNError):
    """Operation requires a trace from a different layer mode."""
