"""Phonological-subspace d-prime profiling and analysis toolkit."""

__version__ = "0.1.0"

from .corpus import Corpus, Manifest, SpeakerMeta, read_corpus, validate_corpus, write_corpus
from .feature_config import FeatureConfig, load_feature_config
from .profiles import DirectionSet, SpeakerProfile, dprime, estimate_directions
from .table import ProfileRow, ProfileTable, assemble_profiles
from .textgrid import TierSet, parse_textgrid

__all__ = [
    "Corpus",
    "DirectionSet",
    "FeatureConfig",
    "Manifest",
    "ProfileRow",
    "ProfileTable",
    "SpeakerMeta",
    "SpeakerProfile",
    "TierSet",
    "assemble_profiles",
    "dprime",
    "estimate_directions",
    "load_feature_config",
    "parse_textgrid",
    "read_corpus",
    "validate_corpus",
    "write_corpus",
]
