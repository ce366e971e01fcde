"""Per-language phone-to-feature configuration.

A configuration maps phone labels to binary phonological classes (five
consonant contrasts, four vowel contrasts), names the three corner vowels
used for vowel-space area, and lists the language's vowel labels. Phone
labels are compared by exact string equality after Unicode NFC
normalization; there is no fuzzy IPA matching.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    EmptyClass,
    FeatureConfigError,
    OverlappingClasses,
    UnknownFeatureKey,
)

CONSONANT_FEATURES = ("nasality", "voicing", "sonorance", "stridency", "manner")
VOWEL_FEATURES = ("height", "lowness", "backness", "rounding")
DPRIME_FEATURES = CONSONANT_FEATURES + VOWEL_FEATURES

DEFAULT_CORNERS = ("a", "i", "u")


def nfc(label: str) -> str:
    return unicodedata.normalize("NFC", label)


@dataclass(frozen=True)
class FeatureClass:
    pos: frozenset[str]
    neg: frozenset[str]

    def side_of(self, label: str) -> str | None:
        if label in self.pos:
            return "pos"
        if label in self.neg:
            return "neg"
        return None


@dataclass(frozen=True)
class FeatureConfig:
    language: str
    consonant_features: dict[str, FeatureClass]
    vowel_features: dict[str, FeatureClass]
    vowel_set: frozenset[str]
    vowel_corners: tuple[str, str, str] = DEFAULT_CORNERS

    @property
    def features(self) -> dict[str, FeatureClass]:
        merged = dict(self.consonant_features)
        merged.update(self.vowel_features)
        return merged


def _parse_feature_map(
    raw: object, expected_keys: tuple[str, ...], section: str
) -> dict[str, FeatureClass]:
    if not isinstance(raw, dict):
        raise FeatureConfigError(f"{section} must be an object")
    out: dict[str, FeatureClass] = {}
    for key, value in raw.items():
        if key not in expected_keys:
            raise UnknownFeatureKey(f"{section}: unknown feature {key!r}")
        if not isinstance(value, dict) or set(value) != {"pos", "neg"}:
            raise FeatureConfigError(f"{section}.{key}: expected pos/neg lists")
        pos = frozenset(nfc(str(p)) for p in value["pos"])
        neg = frozenset(nfc(str(p)) for p in value["neg"])
        if not pos or not neg:
            raise EmptyClass(f"{section}.{key}: both classes must be non-empty")
        overlap = pos & neg
        if overlap:
            raise OverlappingClasses(
                f"{section}.{key}: labels in both classes: {sorted(overlap)}"
            )
        out[key] = FeatureClass(pos=pos, neg=neg)
    missing = [k for k in expected_keys if k not in out]
    if missing:
        raise FeatureConfigError(f"{section}: missing features {missing}")
    return out


def load_feature_config(json_text: str) -> FeatureConfig:
    """Parse and validate a feature configuration document."""
    try:
        raw = json.loads(json_text)
    except json.JSONDecodeError as exc:
        raise FeatureConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise FeatureConfigError("top level must be an object")
    allowed = {
        "language",
        "consonant_features",
        "vowel_features",
        "vowel_corners",
        "vowel_set",
    }
    unknown = set(raw) - allowed
    if unknown:
        raise UnknownFeatureKey(f"unknown top-level keys: {sorted(unknown)}")
    for required in ("language", "consonant_features", "vowel_features", "vowel_set"):
        if required not in raw:
            raise FeatureConfigError(f"missing top-level key {required!r}")

    consonants = _parse_feature_map(
        raw["consonant_features"], CONSONANT_FEATURES, "consonant_features"
    )
    vowels = _parse_feature_map(raw["vowel_features"], VOWEL_FEATURES, "vowel_features")
    vowel_set = frozenset(nfc(str(v)) for v in raw["vowel_set"])
    if not vowel_set:
        raise EmptyClass("vowel_set must be non-empty")

    corners_raw = raw.get("vowel_corners", list(DEFAULT_CORNERS))
    if not isinstance(corners_raw, list) or len(corners_raw) != 3:
        raise FeatureConfigError("vowel_corners must be an array of 3 labels")
    corners = tuple(nfc(str(c)) for c in corners_raw)
    outside = [c for c in corners if c not in vowel_set]
    if outside:
        raise FeatureConfigError(f"vowel_corners not in vowel_set: {outside}")

    return FeatureConfig(
        language=str(raw["language"]),
        consonant_features=consonants,
        vowel_features=vowels,
        vowel_set=vowel_set,
        vowel_corners=corners,  # type: ignore[arg-type]
    )


def load_feature_config_file(path: str | Path) -> FeatureConfig:
    return load_feature_config(Path(path).read_text(encoding="utf-8"))


def dump_feature_config(fc: FeatureConfig) -> str:
    """Serialize a FeatureConfig to its JSON document form."""
    doc = {
        "language": fc.language,
        "consonant_features": {
            k: {"pos": sorted(v.pos), "neg": sorted(v.neg)}
            for k, v in fc.consonant_features.items()
        },
        "vowel_features": {
            k: {"pos": sorted(v.pos), "neg": sorted(v.neg)}
            for k, v in fc.vowel_features.items()
        },
        "vowel_corners": list(fc.vowel_corners),
        "vowel_set": sorted(fc.vowel_set),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
