"""Synthetic corpora with analytically known ground truth.

Each phonological feature gets its own pair of synthetic phone labels and
its own orthogonal embedding axis. Class means sit at +/- half the
effective separation along that axis, with isotropic Gaussian noise, so the
true d-prime of a speaker-feature cell is exactly

    effective separation / noise sigma
    = class_separation * aetiology collapse * severity multiplier / sigma

and no feature leaks into another. Corner vowels /a, i, u/ occupy two extra
axes whose span shrinks with the severity multiplier, giving a closed-form
vowel triangle area. Generation is deterministic per (spec, seed).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Corpus, Manifest, SpeakerMeta, TokenRow, write_corpus
from .errors import LedgerMismatch, SpecInvalid
from .feature_config import (
    DPRIME_FEATURES,
    FeatureClass,
    FeatureConfig,
    dump_feature_config,
)
from .profiles import CONSONANT5
from .table import ProfileTable

_CORNERS = ("a", "i", "u")
_UTTERANCE_LEN = 15
_PHONES_PER_WORD = 3

DEFAULT_TEMPLATES: dict[str, dict[str, float]] = {
    "HC": {f: 1.0 for f in DPRIME_FEATURES},
    "PD": {
        "nasality": 0.9,
        "voicing": 0.85,
        "sonorance": 0.9,
        "stridency": 0.7,
        "manner": 0.65,
        "height": 0.75,
        "lowness": 0.8,
        "backness": 0.8,
        "rounding": 0.75,
    },
    "CP": {f: 0.55 for f in DPRIME_FEATURES},
}

DEFAULT_MULTIPLIERS = {"control": 1.0, "mild": 0.8, "moderate": 0.6, "severe": 0.4}


def _label_pair(feature: str) -> tuple[str, str]:
    return f"{feature}_p", f"{feature}_n"


def make_feature_config(language: str) -> FeatureConfig:
    """The feature configuration matching the synthetic label scheme."""
    consonants = {
        f: FeatureClass(pos=frozenset({_label_pair(f)[0]}), neg=frozenset({_label_pair(f)[1]}))
        for f in CONSONANT5
    }
    vowels = {
        f: FeatureClass(pos=frozenset({_label_pair(f)[0]}), neg=frozenset({_label_pair(f)[1]}))
        for f in DPRIME_FEATURES
        if f not in CONSONANT5
    }
    vowel_labels = {lab for f in vowels for lab in (*vowels[f].pos, *vowels[f].neg)}
    return FeatureConfig(
        language=language,
        consonant_features=consonants,
        vowel_features=vowels,
        vowel_set=frozenset(_CORNERS) | frozenset(vowel_labels),
        vowel_corners=_CORNERS,
    )


@dataclass(frozen=True)
class SynthSpec:
    languages: tuple[str, ...] = ("en",)
    datasets: tuple[str, ...] = ("synthA", "synthB")
    aetiology_templates: dict[str, dict[str, float]] = field(
        default_factory=lambda: {k: dict(v) for k, v in DEFAULT_TEMPLATES.items()}
    )
    severity_multipliers: dict[str, float] = field(
        default_factory=lambda: dict(DEFAULT_MULTIPLIERS)
    )
    speakers_per_cell: int = 4
    token_count_log_mean: float = 5.35  # exp(5.35) ~ 210 phones
    token_count_log_sd: float = 0.15
    token_count_min: int = 105
    token_count_max: int = 12000
    class_separation: float = 2.0
    noise_sigma: float = 1.0
    dim: int = 16
    seed: int = 0
    corner_scale: float = 4.0
    pause_probability: float = 0.3
    severity_jitter: float = 0.05  # log-sd applied per speaker to the multiplier
    token_severity_coupling: float = 0.0  # >0 couples token counts to severity
    emit_ctc_conf: bool = True
    backbone_id: str = "synthetic-bb"
    corpus_name: str = "synthetic"

    def validate(self) -> None:
        if not self.languages or not self.datasets:
            raise SpecInvalid("need at least one language and one dataset")
        if "HC" not in self.aetiology_templates:
            raise SpecInvalid("aetiology_templates must include HC")
        for aet, template in self.aetiology_templates.items():
            for feature in DPRIME_FEATURES:
                value = template.get(feature)
                if value is None or not (0.0 <= value <= 1.0):
                    raise SpecInvalid(f"{aet}.{feature}: collapse factor must be in [0, 1]")
        if "control" not in self.severity_multipliers:
            raise SpecInvalid("severity_multipliers must include control")
        for sev, mult in self.severity_multipliers.items():
            if not (0.0 <= mult <= 1.0):
                raise SpecInvalid(f"severity multiplier {sev}={mult} outside [0, 1]")
        if self.class_separation <= 0:
            raise SpecInvalid("class_separation must be > 0")
        if self.noise_sigma <= 0:
            raise SpecInvalid("noise_sigma must be > 0")
        if self.dim < len(DPRIME_FEATURES) + 3:
            raise SpecInvalid(f"dim must be >= {len(DPRIME_FEATURES) + 3}")
        if self.speakers_per_cell < 1:
            raise SpecInvalid("speakers_per_cell must be >= 1")
        if self.token_count_min < 21:
            raise SpecInvalid("token_count_min must be >= 21 (one token per label)")

    def canonical_json(self) -> str:
        doc = {
            "languages": list(self.languages),
            "datasets": list(self.datasets),
            "aetiology_templates": self.aetiology_templates,
            "severity_multipliers": self.severity_multipliers,
            "speakers_per_cell": self.speakers_per_cell,
            "token_count_log_mean": self.token_count_log_mean,
            "token_count_log_sd": self.token_count_log_sd,
            "token_count_min": self.token_count_min,
            "token_count_max": self.token_count_max,
            "class_separation": self.class_separation,
            "noise_sigma": self.noise_sigma,
            "dim": self.dim,
            "seed": self.seed,
            "corner_scale": self.corner_scale,
            "pause_probability": self.pause_probability,
            "severity_jitter": self.severity_jitter,
            "token_severity_coupling": self.token_severity_coupling,
            "emit_ctc_conf": self.emit_ctc_conf,
            "backbone_id": self.backbone_id,
            "corpus_name": self.corpus_name,
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> "SynthSpec":
        kwargs = dict(doc)
        for key in ("languages", "datasets"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        unknown = set(kwargs) - set(cls.__dataclass_fields__)
        if unknown:
            raise SpecInvalid(f"unknown synth spec keys: {sorted(unknown)}")
        return cls(**kwargs)


@dataclass
class GroundTruthLedger:
    seed: int
    spec_hash: str
    corpus_fingerprint: str
    true_dprime: dict[str, dict[str, float]]
    class_counts: dict[str, dict[str, tuple[int, int]]]
    effective_multiplier: dict[str, float]

    def to_json(self) -> str:
        doc = {
            "seed": self.seed,
            "spec_hash": self.spec_hash,
            "corpus_fingerprint": self.corpus_fingerprint,
            "true_dprime": self.true_dprime,
            "class_counts": {
                spk: {f: list(c) for f, c in feats.items()}
                for spk, feats in self.class_counts.items()
            },
            "effective_multiplier": self.effective_multiplier,
        }
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "GroundTruthLedger":
        doc = json.loads(text)
        return cls(
            seed=doc["seed"],
            spec_hash=doc["spec_hash"],
            corpus_fingerprint=doc["corpus_fingerprint"],
            true_dprime=doc["true_dprime"],
            class_counts={
                spk: {f: (c[0], c[1]) for f, c in feats.items()}
                for spk, feats in doc["class_counts"].items()
            },
            effective_multiplier=doc["effective_multiplier"],
        )


def corpus_fingerprint(corpus: Corpus) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(corpus.embeddings, dtype="<f4").tobytes())
    h.update(str(len(corpus.tokens)).encode())
    for s in sorted(sp.speaker_id for sp in corpus.manifest.speakers):
        h.update(s.encode())
    return h.hexdigest()


def _speaker_cells(spec: SynthSpec):
    """Deterministic enumeration of (language, dataset, aetiology, severity)."""
    severities = [s for s in ("mild", "moderate", "severe") if s in spec.severity_multipliers]
    for language in spec.languages:
        for dataset in spec.datasets:
            for aetiology in sorted(spec.aetiology_templates):
                if aetiology == "HC":
                    yield language, dataset, aetiology, "control"
                else:
                    for severity in severities:
                        yield language, dataset, aetiology, severity


def generate_corpus(
    spec: SynthSpec, out_dir: str | Path | None = None
) -> tuple[Corpus, GroundTruthLedger]:
    """Generate a corpus with planted truth; optionally write it to disk.

    When *out_dir* is given, the interchange files, per-language feature
    configurations (under ``feature_configs/``) and ``ground_truth.json``
    are written there.
    """
    spec.validate()
    labels = [lab for f in DPRIME_FEATURES for lab in _label_pair(f)] + list(_CORNERS)
    axis_of = {f: i for i, f in enumerate(DPRIME_FEATURES)}
    corner_axis_i, corner_axis_u = len(DPRIME_FEATURES), len(DPRIME_FEATURES) + 1

    speakers: list[SpeakerMeta] = []
    tokens: list[TokenRow] = []
    blocks: list[np.ndarray] = []
    row_index: list[tuple[str, int]] = []
    true_dprime: dict[str, dict[str, float]] = {}
    class_counts: dict[str, dict[str, tuple[int, int]]] = {}
    eff_mult: dict[str, float] = {}

    for cell_idx, (language, dataset, aetiology, severity) in enumerate(_speaker_cells(spec)):
        template = spec.aetiology_templates[aetiology]
        base_mult = spec.severity_multipliers["control" if aetiology == "HC" else severity]
        for k in range(spec.speakers_per_cell):
            rng = np.random.default_rng([spec.seed, cell_idx, k])
            speaker_id = f"{language}-{dataset}-{aetiology}-{severity}-{k:03d}"
            mult = base_mult
            if spec.severity_jitter > 0:
                mult = float(
                    np.clip(base_mult * np.exp(rng.normal(0.0, spec.severity_jitter)), 0.0, 1.0)
                )
            eff_mult[speaker_id] = mult

            n_target = np.exp(rng.normal(spec.token_count_log_mean, spec.token_count_log_sd))
            if spec.token_severity_coupling > 0:
                n_target *= mult**spec.token_severity_coupling
            n_tokens = int(np.clip(round(n_target), spec.token_count_min, spec.token_count_max))

            seq = labels * (n_tokens // len(labels))
            seq += labels[: n_tokens - len(seq)]
            seq = list(seq)
            rng.shuffle(seq)

            tally: dict[str, int] = {}
            for lab in seq:
                tally[lab] = tally.get(lab, 0) + 1
            true_dprime[speaker_id] = {}
            class_counts[speaker_id] = {}
            for feature in DPRIME_FEATURES:
                pos_lab, neg_lab = _label_pair(feature)
                sep = spec.class_separation * template[feature] * mult
                true_dprime[speaker_id][feature] = sep / spec.noise_sigma
                class_counts[speaker_id][feature] = (
                    tally.get(pos_lab, 0),
                    tally.get(neg_lab, 0),
                )

            means = np.zeros((len(seq), spec.dim))
            for i, lab in enumerate(seq):
                if lab == "i":
                    means[i, corner_axis_i] = spec.corner_scale * mult
                elif lab == "u":
                    means[i, corner_axis_u] = spec.corner_scale * mult
                elif lab != "a":
                    feature, side = lab.rsplit("_", 1)
                    sep = spec.class_separation * spec.aetiology_templates[aetiology][feature] * mult
                    means[i, axis_of[feature]] = 0.5 * sep if side == "p" else -0.5 * sep
            emb = means + rng.normal(0.0, spec.noise_sigma, size=(len(seq), spec.dim))
            blocks.append(emb.astype("<f4"))

            # Timing: utterances of fixed phone count; words of 3 phones with
            # occasional >150 ms inter-word gaps.
            cursor = 0.0
            for utt_start in range(0, len(seq), _UTTERANCE_LEN):
                chunk = seq[utt_start : utt_start + _UTTERANCE_LEN]
                utt_id = f"{speaker_id}-u{utt_start // _UTTERANCE_LEN:04d}"
                cursor = 0.0
                word_tokens: list[tuple[float, float]] = []
                word_start = cursor
                for j, lab in enumerate(chunk):
                    dur = round(float(np.exp(rng.normal(np.log(0.08), 0.25))), 3)
                    dur = max(dur, 0.02)
                    start, end = round(cursor, 3), round(cursor + dur, 3)
                    tokens.append(TokenRow(speaker_id, utt_id, "phone", lab, start, end))
                    row_index.append((utt_id, j))
                    cursor = end
                    last_in_word = (j + 1) % _PHONES_PER_WORD == 0 or j + 1 == len(chunk)
                    if last_in_word:
                        word_tokens.append((word_start, end))
                        gap = 0.2 if rng.random() < spec.pause_probability else 0.05
                        cursor = round(cursor + gap, 3)
                        word_start = cursor
                for w, (ws, we) in enumerate(word_tokens):
                    tokens.append(TokenRow(speaker_id, utt_id, "word", f"w{w}", ws, we))

            ctc = None
            if spec.emit_ctc_conf:
                ctc = float(np.clip(0.7 + 0.25 * mult + rng.normal(0.0, 0.01), 0.0, 1.0))
            speakers.append(
                SpeakerMeta(
                    speaker_id=speaker_id,
                    dataset=dataset,
                    language=language,
                    aetiology=aetiology,
                    severity=severity,
                    severity_source="clinical",
                    ctc_conf=ctc,
                )
            )

    manifest = Manifest(
        corpus_name=spec.corpus_name,
        backbone_id=spec.backbone_id,
        dim=spec.dim,
        speakers=tuple(speakers),
    )
    embeddings = (
        np.concatenate(blocks, axis=0) if blocks else np.zeros((0, spec.dim), dtype="<f4")
    )
    corpus = Corpus(
        manifest=manifest,
        tokens=tokens,
        embeddings=embeddings,
        row_index=row_index,
    )

    spec_hash = hashlib.sha256(spec.canonical_json().encode()).hexdigest()
    ledger = GroundTruthLedger(
        seed=spec.seed,
        spec_hash=spec_hash,
        corpus_fingerprint=corpus_fingerprint(corpus),
        true_dprime=true_dprime,
        class_counts=class_counts,
        effective_multiplier=eff_mult,
    )

    if out_dir is not None:
        out_dir = Path(out_dir)
        write_corpus(corpus, out_dir)
        fc_dir = out_dir / "feature_configs"
        fc_dir.mkdir(parents=True, exist_ok=True)
        for language in spec.languages:
            fc = make_feature_config(language)
            (fc_dir / f"{language}.json").write_text(
                dump_feature_config(fc), encoding="utf-8"
            )
        (out_dir / "ground_truth.json").write_text(ledger.to_json(), encoding="utf-8")

    return corpus, ledger


@dataclass
class LedgerCheckReport:
    n_checked: int
    n_within: int
    n_missing: int
    failures: list[str]

    @property
    def fraction_within(self) -> float:
        return self.n_within / self.n_checked if self.n_checked else 1.0

    def lines(self) -> list[str]:
        out = [
            f"ledger check: {self.n_within}/{self.n_checked} cells within tolerance "
            f"({self.fraction_within:.4f}), {self.n_missing} missing"
        ]
        out.extend(self.failures[:20])
        return out


def ledger_check(
    corpus: Corpus,
    ledger: GroundTruthLedger,
    table: ProfileTable,
    *,
    n_se: float = 4.0,
) -> LedgerCheckReport:
    """Compare estimated d-primes against the planted truth.

    The tolerance per cell is *n_se* standard errors of the d-prime
    estimator given that cell's class counts. Raises LedgerMismatch when the
    ledger does not belong to this corpus.
    """
    fingerprint = corpus_fingerprint(corpus)
    if fingerprint != ledger.corpus_fingerprint:
        raise LedgerMismatch("corpus fingerprint does not match the ledger")

    checked = within = missing = 0
    failures: list[str] = []
    by_speaker = {row.profile.speaker_id: row for row in table.rows}
    for speaker_id, truths in ledger.true_dprime.items():
        row = by_speaker.get(speaker_id)
        if row is None:
            missing += len(truths)
            continue
        for feature, true_d in truths.items():
            estimate = row.get(feature)
            if estimate is None:
                missing += 1
                continue
            n_pos, n_neg = ledger.class_counts[speaker_id][feature]
            se = np.sqrt(
                1.0 / n_pos + 1.0 / n_neg + true_d**2 / (2.0 * (n_pos + n_neg - 2))
            )
            checked += 1
            if abs(estimate - true_d) <= n_se * se:
                within += 1
            else:
                failures.append(
                    f"{speaker_id}/{feature}: estimate {estimate:.3f} vs true {true_d:.3f} "
                    f"(tolerance {n_se * se:.3f})"
                )
    return LedgerCheckReport(
        n_checked=checked, n_within=within, n_missing=missing, failures=failures
    )
