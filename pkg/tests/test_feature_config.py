import json

import pytest

from phonoscope.errors import (
    EmptyClass,
    FeatureConfigError,
    OverlappingClasses,
    UnknownFeatureKey,
)
from phonoscope.feature_config import (
    dump_feature_config,
    load_feature_config,
)


def full_doc():
    consonants = {
        "nasality": {"pos": ["m", "n", "ng"], "neg": ["p", "b", "t", "d", "k", "g"]},
        "voicing": {"pos": ["b", "d", "g"], "neg": ["p", "t", "k"]},
        "sonorance": {"pos": ["m", "n", "l"], "neg": ["s", "t", "k"]},
        "stridency": {"pos": ["s", "z"], "neg": ["t", "d"]},
        "manner": {"pos": ["s", "f"], "neg": ["p", "t"]},
    }
    vowels = {
        "height": {"pos": ["i", "u"], "neg": ["a"]},
        "lowness": {"pos": ["a"], "neg": ["i", "u"]},
        "backness": {"pos": ["u", "o"], "neg": ["i", "e"]},
        "rounding": {"pos": ["u", "o"], "neg": ["i", "a"]},
    }
    return {
        "language": "en",
        "consonant_features": consonants,
        "vowel_features": vowels,
        "vowel_set": ["a", "e", "i", "o", "u"],
    }


def test_nasality_classes_load():
    fc = load_feature_config(json.dumps(full_doc()))
    assert fc.consonant_features["nasality"].pos == {"m", "n", "ng"}
    assert fc.consonant_features["nasality"].neg == {"p", "b", "t", "d", "k", "g"}


def test_missing_corners_default_to_a_i_u():
    fc = load_feature_config(json.dumps(full_doc()))
    assert fc.vowel_corners == ("a", "i", "u")


def test_explicit_corners():
    doc = full_doc()
    doc["vowel_corners"] = ["a", "e", "o"]
    fc = load_feature_config(json.dumps(doc))
    assert fc.vowel_corners == ("a", "e", "o")


def test_overlapping_classes_rejected():
    doc = full_doc()
    doc["consonant_features"]["voicing"] = {"pos": ["b", "d"], "neg": ["b", "t"]}
    with pytest.raises(OverlappingClasses):
        load_feature_config(json.dumps(doc))


def test_empty_class_rejected():
    doc = full_doc()
    doc["consonant_features"]["manner"] = {"pos": [], "neg": ["p"]}
    with pytest.raises(EmptyClass):
        load_feature_config(json.dumps(doc))


def test_unknown_feature_key_rejected():
    doc = full_doc()
    doc["consonant_features"]["aspiration"] = {"pos": ["ph"], "neg": ["p"]}
    with pytest.raises(UnknownFeatureKey):
        load_feature_config(json.dumps(doc))


def test_unknown_top_level_key_rejected():
    doc = full_doc()
    doc["bogus"] = 1
    with pytest.raises(UnknownFeatureKey):
        load_feature_config(json.dumps(doc))


def test_missing_feature_rejected():
    doc = full_doc()
    del doc["consonant_features"]["manner"]
    with pytest.raises(FeatureConfigError):
        load_feature_config(json.dumps(doc))


def test_corners_must_be_vowels():
    doc = full_doc()
    doc["vowel_corners"] = ["a", "i", "zz"]
    with pytest.raises(FeatureConfigError):
        load_feature_config(json.dumps(doc))


def test_nfc_normalization():
    doc = full_doc()
    # "e" + combining acute composes to precomposed e-acute
    doc["vowel_set"].append("é")
    doc["vowel_features"]["height"]["pos"].append("é")
    fc = load_feature_config(json.dumps(doc))
    assert "é" in fc.vowel_set
    assert "é" in fc.vowel_features["height"].pos


def test_dump_load_roundtrip():
    fc = load_feature_config(json.dumps(full_doc()))
    fc2 = load_feature_config(dump_feature_config(fc))
    assert fc2 == fc
