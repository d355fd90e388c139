"""Exception types shared across the package."""


class RegionRulesError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(RegionRulesError):
    """A configuration value violates a precondition (usage error)."""


class ParseError(RegionRulesError):
    """A cell could not be parsed under the declared column kind."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


class SchemaError(RegionRulesError):
    """Header/schema mismatch: duplicate, missing, or unknown column."""


class DomainError(RegionRulesError):
    """A value lies outside its documented domain."""


class DegenerateLabelsError(RegionRulesError):
    """Label vector contains a single class; ROC threshold undefined."""


class ShapeError(RegionRulesError):
    """Array lengths or dimensions do not line up."""


class EmptyMatrixError(RegionRulesError):
    """An importance matrix ended up with zero usable rows."""


class NoFeatureError(RegionRulesError):
    """No feature clears the frequency requirement at any threshold."""


class EmptyResultError(RegionRulesError):
    """An operation that must pick from candidates received none."""


class DegenerateFeatureError(RegionRulesError):
    """A feature has too few distinct values to be binned."""


class NoTargetError(RegionRulesError):
    """The target subgroup is empty where it must not be."""


class ZeroSupportError(RegionRulesError):
    """Confidence requested for a rule set no row satisfies."""


class InfeasibleConfigError(RegionRulesError):
    """The configuration cannot be satisfied by the given data."""


class RangeError(RegionRulesError):
    """An index points outside the table."""


class TooLargeError(RegionRulesError):
    """Instance exceeds the tractability guard of the exhaustive oracle."""


class SpecError(RegionRulesError):
    """A synthetic-data spec is internally inconsistent."""
