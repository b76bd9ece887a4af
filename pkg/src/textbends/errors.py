"""Exception hierarchy shared across the kit."""


class TextBenDSError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(TextBenDSError, ValueError):
    """Invalid generator, protocol or CLI configuration."""


class DomainError(TextBenDSError, ValueError):
    """A weighting kernel or metric was evaluated outside its domain."""


class IntegrityError(TextBenDSError):
    """Corpus data violates a schema invariant (dangling key, duplicate id, bad tf)."""


class IngestError(IntegrityError):
    """A JSONL record could not be parsed into the nested-document format."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class QueryValidationError(TextBenDSError, ValueError):
    """A QuerySpec violates the constraints of its query shape."""

    def __init__(self, message: str, constraint: str | None = None):
        self.constraint = constraint
        super().__init__(f"[{constraint}] {message}" if constraint else message)


class NondeterminismError(TextBenDSError):
    """Repeated executions of one query disagreed."""


class EquivalenceError(NondeterminismError):
    """Two executors returned different rankings for the same query."""
