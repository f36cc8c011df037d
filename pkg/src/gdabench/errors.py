"""Exception types shared across the toolkit."""


class GdaBenchError(Exception):
    """Base class for all toolkit errors."""


class ParseError(GdaBenchError):
    """A data file violates its expected line format."""


class ConsistencyError(GdaBenchError):
    """Inputs that must agree (vocab, split, graph) do not."""


class SplitError(GdaBenchError):
    """Invalid split request (empty stratum, infeasible negative count, ...)."""


class TrainingError(GdaBenchError):
    """Embedding or classifier training failed (non-finite loss, bad input)."""


class ConfigError(GdaBenchError):
    """Experiment configuration is invalid."""


class EvalError(GdaBenchError):
    """Evaluation request cannot be satisfied (missing query, empty records)."""
