"""Audio + TextGrid to phone-level embedding corpus extraction."""

__version__ = "0.1.0"

from .extract import ExtractionJob, extract
from .pooling import pool_frames

__all__ = ["ExtractionJob", "extract", "pool_frames", "__version__"]
