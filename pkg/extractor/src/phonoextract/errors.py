class ExtractError(Exception):
    """Base class for extraction failures."""


class MissingTextGrid(ExtractError):
    """An audio file has no matching TextGrid."""


class EmptyUtterance(ExtractError):
    """No frames available for an interval."""


class ChecksumMismatch(ExtractError):
    """Re-extraction produced different bytes than an existing output."""


class BadAudio(ExtractError):
    """Unreadable or unsupported audio file."""


class BadTextGrid(ExtractError):
    """Unparseable TextGrid or missing required tiers."""
