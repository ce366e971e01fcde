"""Per-speaker phonological profiles.

A profile holds 9 segmental d-prime values (5 consonant contrasts, 4 vowel
contrasts), 3 structural metrics (boundary sharpness, cross-position cosine
similarity, vowel triangle area), and 3 prosodic metrics (speech rate, pause
rate, vowel duration coefficient of variation). Feature directions are
estimated from healthy-control speech of the same language only; a d-prime
is emitted only when both phone classes have at least 5 tokens.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .corpus import MIN_TOKENS_PER_CLASS, Corpus, Utterance
from .errors import (
    DegenerateVariance,
    EmptyFeatureClass,
    NoHealthyControls,
    ZeroVector,
)
from .feature_config import CONSONANT_FEATURES, DPRIME_FEATURES, FeatureConfig

STRUCTURAL_FEATURES = ("boundary_sharpness", "cross_position_cos", "vowel_triangle_area")
PROSODIC_FEATURES = ("speech_rate", "pause_rate", "vowel_duration_cv")

FULL15 = DPRIME_FEATURES + STRUCTURAL_FEATURES + PROSODIC_FEATURES
MAIN13 = tuple(f for f in FULL15 if f not in ("boundary_sharpness", "cross_position_cos"))
CONSONANT5 = CONSONANT_FEATURES

COMPOSITE = "composite_consonant_dprime"
MIN_CORNER_TOKENS = 3
PAUSE_THRESHOLD_S = 0.150


def dprime(pos, neg) -> float:
    """Signal-detection sensitivity index between two projected samples.

    d' = (mean(pos) - mean(neg)) / sqrt((var(pos) + var(neg)) / 2), with
    sample (n-1) variances. Positive when the pos mean is larger.
    """
    a = np.asarray(pos, dtype=float)
    b = np.asarray(neg, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise ValueError("dprime needs >= 2 values per class")
    pooled_sd = sqrt((a.var(ddof=1) + b.var(ddof=1)) / 2.0)
    if pooled_sd < 1e-12:
        raise DegenerateVariance("both classes have ~zero variance")
    return float((a.mean() - b.mean()) / pooled_sd)


@dataclass(frozen=True)
class DirectionSet:
    """Unit feature-direction vectors estimated from healthy controls."""

    language: str
    backbone_id: str
    directions: dict[str, np.ndarray]
    hc_speaker_count: int
    hc_token_counts: dict[str, tuple[int, int]]

    def matrix(self, features: tuple[str, ...] = DPRIME_FEATURES) -> np.ndarray:
        return np.stack([self.directions[f] for f in features], axis=1)


def estimate_directions(corpus: Corpus, language: str, fc: FeatureConfig) -> DirectionSet:
    """Estimate one unit direction per feature from pooled HC tokens.

    Direction = normalize(mean(pos embeddings) - mean(neg embeddings)) over
    all healthy-control tokens of the language.
    """
    hc_ids = [
        s.speaker_id
        for s in corpus.speakers_of_language(language)
        if s.aetiology == "HC"
    ]
    if not hc_ids:
        raise NoHealthyControls(f"no HC speakers for language {language!r}")

    rows_by_label: dict[str, list[int]] = {}
    for speaker_id in hc_ids:
        labels, rows = corpus.phone_labels_and_rows(speaker_id)
        for label, row in zip(labels, rows):
            rows_by_label.setdefault(label, []).append(row)

    directions: dict[str, np.ndarray] = {}
    counts: dict[str, tuple[int, int]] = {}
    for feature, klass in fc.features.items():
        pos_rows = [r for lab in klass.pos for r in rows_by_label.get(lab, ())]
        neg_rows = [r for lab in klass.neg for r in rows_by_label.get(lab, ())]
        if not pos_rows or not neg_rows:
            raise EmptyFeatureClass(
                f"feature {feature}: HC pool has {len(pos_rows)} pos / {len(neg_rows)} neg tokens"
            )
        delta = corpus.embeddings[pos_rows].mean(axis=0) - corpus.embeddings[neg_rows].mean(axis=0)
        delta = delta.astype(float)
        norm = float(np.linalg.norm(delta))
        if norm < 1e-12:
            raise ZeroVector(f"feature {feature}: HC class means coincide")
        directions[feature] = delta / norm
        counts[feature] = (len(pos_rows), len(neg_rows))

    return DirectionSet(
        language=language,
        backbone_id=corpus.backbone_id,
        directions=directions,
        hc_speaker_count=len(hc_ids),
        hc_token_counts=counts,
    )


def segmental_profile(
    labels: list[str],
    embeddings: np.ndarray,
    directions: DirectionSet,
    fc: FeatureConfig,
    min_tokens: int = MIN_TOKENS_PER_CLASS,
) -> tuple[dict[str, float | None], list[str]]:
    """Project a speaker's phone embeddings and compute the 9 d-primes.

    Returns the per-feature values (None where a class is below the token
    minimum or variance degenerates) and a list of warning strings.
    """
    warnings: list[str] = []
    idx_by_label: dict[str, list[int]] = {}
    for i, label in enumerate(labels):
        idx_by_label.setdefault(label, []).append(i)

    feature_order = tuple(fc.features)
    w = directions.matrix(feature_order)
    projections = embeddings @ w if len(labels) else np.zeros((0, len(feature_order)))

    out: dict[str, float | None] = {}
    for col, feature in enumerate(feature_order):
        klass = fc.features[feature]
        pos_idx = [i for lab in klass.pos for i in idx_by_label.get(lab, ())]
        neg_idx = [i for lab in klass.neg for i in idx_by_label.get(lab, ())]
        if min(len(pos_idx), len(neg_idx)) < min_tokens:
            out[feature] = None
            continue
        try:
            out[feature] = dprime(projections[pos_idx, col], projections[neg_idx, col])
        except DegenerateVariance:
            out[feature] = None
            warnings.append(f"{feature}: degenerate variance, value dropped")
    return out, warnings


def _unit_rows(embeddings: np.ndarray, rows: list[int]) -> np.ndarray | None:
    e = embeddings[rows].astype(float)
    norms = np.linalg.norm(e, axis=1)
    if np.any(norms == 0.0):
        return None
    return e / norms[:, None]


def structural_metrics(
    utterances: tuple[Utterance, ...],
    embeddings: np.ndarray,
    fc: FeatureConfig,
) -> dict[str, float | None]:
    """Boundary sharpness, cross-position cosine, vowel triangle area.

    Boundary sharpness averages 1 - cos over consecutive phone tokens within
    each utterance (pairs spanning silent gaps included, never across
    utterances). Cross-position cosine averages within each phone label
    first, then across labels. The triangle area needs at least 3 tokens of
    each corner vowel.
    """
    cos_dists: list[float] = []
    rows_by_label: dict[str, list[int]] = {}
    for utt in utterances:
        rows = [t.row for t in utt.phones if t.row is not None and t.label]
        for tok in utt.phones:
            if tok.row is not None and tok.label:
                rows_by_label.setdefault(tok.label, []).append(tok.row)
        if len(rows) >= 2:
            e = embeddings[rows].astype(float)
            norms = np.linalg.norm(e, axis=1)
            ok = (norms[:-1] > 0) & (norms[1:] > 0)
            dots = np.einsum("ij,ij->i", e[:-1], e[1:])
            cosines = np.clip(dots[ok] / (norms[:-1][ok] * norms[1:][ok]), -1.0, 1.0)
            cos_dists.extend((1.0 - cosines).tolist())
    boundary = float(np.mean(cos_dists)) if cos_dists else None

    label_means: list[float] = []
    for label in sorted(rows_by_label):
        rows = rows_by_label[label]
        if len(rows) < 2:
            continue
        units = _unit_rows(embeddings, rows)
        if units is None:
            continue
        n = len(rows)
        total = float(np.linalg.norm(units.sum(axis=0)) ** 2)
        label_means.append(float(np.clip((total - n) / (n * (n - 1)), -1.0, 1.0)))
    cross_pos = float(np.mean(label_means)) if label_means else None

    vta: float | None = None
    corner_a, corner_i, corner_u = fc.vowel_corners
    corner_rows = [rows_by_label.get(c, []) for c in (corner_a, corner_i, corner_u)]
    if all(len(r) >= MIN_CORNER_TOKENS for r in corner_rows):
        means = [embeddings[r].astype(float).mean(axis=0) for r in corner_rows]
        e1 = means[1] - means[0]
        e2 = means[2] - means[0]
        gram = float(e1 @ e1) * float(e2 @ e2) - float(e1 @ e2) ** 2
        vta = 0.5 * sqrt(max(0.0, gram))

    return {
        "boundary_sharpness": boundary,
        "cross_position_cos": cross_pos,
        "vowel_triangle_area": vta,
    }


def prosodic_metrics(
    utterances: tuple[Utterance, ...], fc: FeatureConfig
) -> dict[str, float | None]:
    """Speech rate, pause rate, vowel duration coefficient of variation.

    Speech rate divides the phone count by summed phone duration. Pause rate
    is the share of within-utterance inter-word gaps longer than 150 ms.
    """
    n_phones = 0
    phone_time = 0.0
    vowel_durations: list[float] = []
    gaps: list[float] = []
    for utt in utterances:
        for tok in utt.phones:
            if not tok.label:
                continue
            n_phones += 1
            phone_time += tok.duration
            if tok.label in fc.vowel_set:
                vowel_durations.append(tok.duration)
        words = [t for t in utt.words if t.label]
        for prev, cur in zip(words, words[1:]):
            gaps.append(cur.start_s - prev.end_s)

    speech_rate = n_phones / phone_time if n_phones and phone_time > 0 else None
    pause_rate = (
        sum(1 for g in gaps if g > PAUSE_THRESHOLD_S) / len(gaps) if gaps else None
    )
    vdcv: float | None = None
    if len(vowel_durations) >= 2:
        arr = np.asarray(vowel_durations)
        mean = float(arr.mean())
        if mean > 0:
            vdcv = float(arr.std(ddof=1)) / mean
    return {"speech_rate": speech_rate, "pause_rate": pause_rate, "vowel_duration_cv": vdcv}


@dataclass(frozen=True)
class SpeakerProfile:
    speaker_id: str
    backbone_id: str
    values: dict[str, float | None]
    n_phones: int

    def __post_init__(self) -> None:
        missing = [f for f in FULL15 if f not in self.values]
        if missing:
            raise ValueError(f"profile missing features: {missing}")

    @property
    def composite_consonant_dprime(self) -> float | None:
        vals = [self.values[f] for f in CONSONANT5]
        if any(v is None for v in vals):
            return None
        return float(np.mean([v for v in vals if v is not None]))

    def get(self, feature: str) -> float | None:
        if feature == COMPOSITE:
            return self.composite_consonant_dprime
        if feature == "n_phones":
            return float(self.n_phones)
        return self.values[feature]


def empty_values() -> dict[str, float | None]:
    return {f: None for f in FULL15}


def build_speaker_profile(
    corpus: Corpus,
    speaker_id: str,
    directions: DirectionSet | None,
    fc: FeatureConfig,
) -> tuple[SpeakerProfile, list[str]]:
    """Compute the full 15-feature profile for one speaker."""
    utterances = corpus.utterances(speaker_id)
    labels, rows = corpus.phone_labels_and_rows(speaker_id)
    warnings: list[str] = []

    values = empty_values()
    if directions is not None and labels:
        seg, seg_warnings = segmental_profile(
            labels, corpus.embeddings[rows], directions, fc
        )
        values.update(seg)
        warnings.extend(f"{speaker_id}: {w}" for w in seg_warnings)
    elif directions is None:
        warnings.append(f"{speaker_id}: no HC baseline, segmental features missing")

    values.update(structural_metrics(utterances, corpus.embeddings, fc))
    values.update(prosodic_metrics(utterances, fc))

    n_phones = sum(1 for lab in labels if lab)
    profile = SpeakerProfile(
        speaker_id=speaker_id,
        backbone_id=corpus.backbone_id,
        values=values,
        n_phones=n_phones,
    )
    return profile, warnings
