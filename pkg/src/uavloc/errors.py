"""Exception types shared across the localization pipeline."""


class LocalizationError(Exception):
    """Base class for pipeline errors."""


class InsufficientReferencesError(LocalizationError):
    """Fewer than three reference nodes available for multilateration."""


class DegenerateGeometryError(LocalizationError):
    """Reference geometry is rank deficient (e.g. collinear anchors)."""

    def __init__(self, message, condition=float("inf")):
        super().__init__(message)
        self.condition = condition


class DegenerateFitError(LocalizationError):
    """Calibration fit is underdetermined (all samples at one distance)."""


class NoEstimateError(LocalizationError):
    """No successful iteration exists to report an estimate from."""


class ObservationOrderError(LocalizationError):
    """Observation timestamps went backwards."""


class LogFormatError(LocalizationError):
    """Observation log file is malformed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
