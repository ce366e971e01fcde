"""Exception taxonomy.

Three top-level families map onto the CLI exit codes: corpus/input problems
(exit 1), configuration problems (exit 2), and analysis problems (exit 3).
"""


class PhonoscopeError(Exception):
    """Base class for all errors raised by this package."""


# ---------------------------------------------------------------- exit 2


class ConfigError(PhonoscopeError):
    """Invalid run configuration or synthesis spec."""


class SpecInvalid(ConfigError):
    """Synthesis spec violates its own invariants."""


# ---------------------------------------------------------------- exit 1


class CorpusError(PhonoscopeError):
    """Problem with corpus files or their contents."""


class MissingFile(CorpusError):
    pass


class RowCountMismatch(CorpusError):
    pass


class DimMismatch(CorpusError):
    pass


class OrphanToken(CorpusError):
    """Phone token without an embedding row, or an embedding row without a token."""


class TextGridError(CorpusError):
    """Base class for TextGrid parse failures."""


class MalformedHeader(TextGridError):
    pass


class MalformedTextGrid(TextGridError):
    """Structurally broken TextGrid not covered by a more specific error."""


class TruncatedTier(TextGridError):
    """A tier declares more intervals than the file contains."""


class NonMonotoneIntervals(TextGridError):
    """Interval times are not strictly increasing (xmax <= xmin)."""


class FeatureConfigError(CorpusError):
    """Base class for phone-feature configuration problems."""


class OverlappingClasses(FeatureConfigError):
    pass


class EmptyClass(FeatureConfigError):
    pass


class UnknownFeatureKey(FeatureConfigError):
    pass


# ---------------------------------------------------------------- exit 3


class AnalysisError(PhonoscopeError):
    """Problem raised while computing a statistic or an analysis."""


class NoHealthyControls(AnalysisError):
    pass


class EmptyFeatureClass(AnalysisError):
    pass


class DegenerateVariance(AnalysisError):
    pass


class ConstantInput(AnalysisError):
    pass


class TooFewPairs(AnalysisError):
    pass


class EmptyGroup(AnalysisError):
    pass


class TooFewGroups(AnalysisError):
    pass


class DegeneratePooledSD(AnalysisError):
    pass


class ZeroVector(AnalysisError):
    pass


class SingularSystem(AnalysisError):
    pass


class StatisticUndefinedOnResample(AnalysisError):
    """A bootstrap statistic stayed undefined after the retry budget."""


class InsufficientSeverityLevels(AnalysisError):
    pass


class GroupTooSmall(AnalysisError):
    pass


class NoQualifyingLanguagePair(AnalysisError):
    pass


class NoSharedSpeakers(AnalysisError):
    pass


class NoQualifyingSpeakers(AnalysisError):
    pass


class SingleDataset(AnalysisError):
    pass


class ClassAbsentFromAllTraining(AnalysisError):
    pass


class MissingBaselineColumn(AnalysisError):
    pass


class InsufficientData(AnalysisError):
    pass


class OutOfRange(AnalysisError):
    pass


class LedgerMismatch(AnalysisError):
    """Ground-truth ledger does not belong to the corpus it is checked against."""
