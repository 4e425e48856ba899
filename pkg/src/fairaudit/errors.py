"""Exception hierarchy. The CLI maps these onto exit codes."""


class FairAuditError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(FairAuditError):
    """Bad configuration or usage (unknown model kind, bad grid, ...)."""


class DataError(FairAuditError):
    """Malformed input data: ragged CSV rows, missing columns, bad checksums."""


class DegenerateGroupError(FairAuditError):
    """A (label, group) cell needed for reweighing is empty."""

    def __init__(self, cell: str):
        super().__init__(f"degenerate group: cell {cell!r} has no samples")
        self.cell = cell


class UndefinedMetricError(FairAuditError):
    """A rate or index has a zero denominator."""


class TrainingError(FairAuditError):
    """Model fitting or prediction was given unusable input."""
