"""Exception types shared across the package."""


class DiedatError(Exception):
    """Base class; the CLI turns these into one-line diagnostics."""


class ParseError(DiedatError):
    """Malformed input file (corpus, vectors, dataset, config)."""


class ConfigError(DiedatError):
    """Invalid configuration value or option combination."""


class ContractError(DiedatError):
    """An operation was called outside its documented contract."""


class CapabilityError(DiedatError):
    """A checkpoint does not support the requested task."""


class CheckpointError(DiedatError):
    """Checkpoint directory is missing, inconsistent or truncated."""


class GradCheckError(DiedatError):
    """Gradient checking hit a non-finite loss value."""


class UndefinedSimilarityError(DiedatError):
    """Cosine similarity requested for a zero vector."""
