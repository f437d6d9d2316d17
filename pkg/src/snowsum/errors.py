"""Exception taxonomy. CLI maps these onto exit codes (2 data, 3 numeric)."""


class SnowsumError(Exception):
    """Base class for all toolkit errors."""


class DataError(SnowsumError):
    """Invalid input data: bad manifests, mismatched dimensions, broken invariants."""


class FormatError(DataError):
    """Malformed on-disk payload: bad magic, version mismatch, truncation."""


class ConvergenceError(SnowsumError):
    """Numeric failure: a solver did not reach its tolerance."""


class UndefinedMetricError(SnowsumError):
    """Metric with a zero denominator (no events to rate)."""
