"""Shared fixtures and builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from phonoscope.corpus import Corpus, Manifest, SpeakerMeta, TokenRow
from phonoscope.feature_config import FeatureClass, FeatureConfig
from phonoscope.profiles import SpeakerProfile, empty_values
from phonoscope.table import ProfileRow


def tiny_feature_config(language: str = "en") -> FeatureConfig:
    """Config where each feature has a single pos/neg phone label."""
    consonants = {
        name: FeatureClass(pos=frozenset({f"{name}_p"}), neg=frozenset({f"{name}_n"}))
        for name in ("nasality", "voicing", "sonorance", "stridency", "manner")
    }
    vowels = {
        name: FeatureClass(pos=frozenset({f"{name}_p"}), neg=frozenset({f"{name}_n"}))
        for name in ("height", "lowness", "backness", "rounding")
    }
    vowel_labels = {lab for fc in vowels.values() for lab in (*fc.pos, *fc.neg)}
    return FeatureConfig(
        language=language,
        consonant_features=consonants,
        vowel_features=vowels,
        vowel_set=frozenset({"a", "i", "u"}) | frozenset(vowel_labels),
        vowel_corners=("a", "i", "u"),
    )


def build_corpus(
    speakers: list[SpeakerMeta],
    utterances: dict[str, list[tuple[str, list[tuple[str, float, float]], list[tuple[str, float, float]]]]],
    embeddings_of,
    dim: int = 4,
    backbone_id: str = "test-bb",
) -> Corpus:
    """Assemble an in-memory corpus.

    *utterances* maps speaker_id to a list of (utterance_id, phones, words)
    where phones/words are (label, start, end) triples. *embeddings_of* is
    called with (speaker_id, utterance_id, ordinal, label) and must return a
    dim-length vector.
    """
    tokens: list[TokenRow] = []
    rows: list[np.ndarray] = []
    row_index: list[tuple[str, int]] = []
    for speaker_id, utts in utterances.items():
        for utt_id, phones, words in utts:
            ordered = sorted(phones, key=lambda p: p[1])
            for ordinal, (label, start, end) in enumerate(ordered):
                tokens.append(TokenRow(speaker_id, utt_id, "phone", label, start, end))
                row_index.append((utt_id, ordinal))
                rows.append(np.asarray(embeddings_of(speaker_id, utt_id, ordinal, label)))
            for label, start, end in words:
                tokens.append(TokenRow(speaker_id, utt_id, "word", label, start, end))
    manifest = Manifest(
        corpus_name="fixture",
        backbone_id=backbone_id,
        dim=dim,
        speakers=tuple(speakers),
    )
    emb = (
        np.stack(rows).astype("<f4") if rows else np.zeros((0, dim), dtype="<f4")
    )
    with_tokens = {t.speaker_id for t in tokens}
    return Corpus(
        manifest=manifest,
        tokens=tokens,
        embeddings=emb,
        row_index=row_index,
        token_free_speakers=frozenset(s.speaker_id for s in speakers) - with_tokens,
    )


def make_profile_row(
    speaker_id: str,
    *,
    aetiology: str = "HC",
    severity: str = "control",
    dataset: str = "ds1",
    language: str = "en",
    backbone_id: str = "test-bb",
    n_phones: int = 100,
    ctc_conf: float | None = None,
    **feature_values: float,
) -> ProfileRow:
    """Build a ProfileRow with the given feature values, rest missing."""
    values = empty_values()
    for name, value in feature_values.items():
        if name not in values:
            raise KeyError(name)
        values[name] = value
    meta = SpeakerMeta(
        speaker_id=speaker_id,
        dataset=dataset,
        language=language,
        aetiology=aetiology,
        severity=severity,
        severity_source="clinical" if severity != "unknown" else "none",
        ctc_conf=ctc_conf,
    )
    profile = SpeakerProfile(
        speaker_id=speaker_id,
        backbone_id=backbone_id,
        values=values,
        n_phones=n_phones,
    )
    return ProfileRow(meta=meta, profile=profile)


def consonant_row(
    speaker_id: str,
    consonants: list[float],
    **kwargs,
) -> ProfileRow:
    names = ("nasality", "voicing", "sonorance", "stridency", "manner")
    return make_profile_row(speaker_id, **dict(zip(names, consonants)), **kwargs)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
