"""Exception types shared across the package."""


class VcnetError(Exception):
    """Base class for all vcnet errors."""


class SchemaError(VcnetError):
    """CSV header or cell content does not match the declared schema."""


class DuplicateRowError(VcnetError):
    """Two rows claim the same (entity, year) observation."""


class ConfigurationError(VcnetError):
    """Variable or normalization configuration is inconsistent with the data."""


class InsufficientDataError(VcnetError):
    """Not enough observations to compute the requested statistic."""


class DegenerateSeriesError(VcnetError):
    """A series has zero variance, so its correlation is undefined."""


class DegenerateSubsetError(VcnetError):
    """A volatility subset is too small, or has zero variance on it."""


class DegenerateTestError(VcnetError):
    """The z-test inputs admit no test (zero spread or too few entities)."""
