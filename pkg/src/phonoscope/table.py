"""Profile table: one row per (speaker, backbone), CSV serialization.

The table is the input to every analysis. Its CSV form has the metadata
columns, n_phones, the 15 feature columns (empty cell = missing), and the
composite consonant d-prime.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Corpus, SpeakerMeta
from .errors import CorpusError
from .feature_config import FeatureConfig
from .profiles import (
    COMPOSITE,
    FULL15,
    DirectionSet,
    SpeakerProfile,
    build_speaker_profile,
)

META_COLUMNS = (
    "speaker_id",
    "backbone_id",
    "dataset",
    "language",
    "aetiology",
    "severity",
    "severity_source",
    "n_phones",
)
CSV_COLUMNS = META_COLUMNS + FULL15 + (COMPOSITE,)


@dataclass(frozen=True)
class ProfileRow:
    meta: SpeakerMeta
    profile: SpeakerProfile

    def get(self, feature: str) -> float | None:
        return self.profile.get(feature)


@dataclass
class ProfileTable:
    rows: list[ProfileRow]
    findings: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def filter(self, predicate) -> "ProfileTable":
        return ProfileTable([r for r in self.rows if predicate(r)])

    def by_backbone(self) -> dict[str, "ProfileTable"]:
        out: dict[str, list[ProfileRow]] = {}
        for row in self.rows:
            out.setdefault(row.profile.backbone_id, []).append(row)
        return {k: ProfileTable(v) for k, v in sorted(out.items())}

    def values(self, feature: str) -> np.ndarray:
        """Feature values across rows, NaN where missing."""
        return np.asarray(
            [np.nan if (v := r.get(feature)) is None else v for r in self.rows]
        )

    def datasets(self) -> list[str]:
        return sorted({r.meta.dataset for r in self.rows})

    def languages(self) -> list[str]:
        return sorted({r.meta.language for r in self.rows})

    def aetiologies(self) -> list[str]:
        return sorted({r.meta.aetiology for r in self.rows})

    def complete_case(self, features: tuple[str, ...]) -> list[ProfileRow]:
        return [r for r in self.rows if all(r.get(f) is not None for f in features)]

    def hc_feature_means(self, language: str) -> dict[str, float | None]:
        """Per-feature HC mean for one language (pairwise deletion)."""
        out: dict[str, float | None] = {}
        hc = [r for r in self.rows if r.meta.language == language and r.meta.aetiology == "HC"]
        for feature in FULL15 + (COMPOSITE,):
            vals = [v for r in hc if (v := r.get(feature)) is not None]
            out[feature] = float(np.mean(vals)) if vals else None
        return out

    def hc_normalized(self, row: ProfileRow, feature: str, hc_means=None) -> float | None:
        means = hc_means if hc_means is not None else self.hc_feature_means(row.meta.language)
        value = row.get(feature)
        baseline = means.get(feature)
        if value is None or baseline is None or baseline == 0.0:
            return None
        return value / baseline

    # ------------------------------------------------------------- CSV

    def to_csv_text(self) -> str:
        lines = [",".join(CSV_COLUMNS)]
        ordered = sorted(
            self.rows, key=lambda r: (r.meta.speaker_id, r.profile.backbone_id)
        )
        for row in ordered:
            cells = [
                row.meta.speaker_id,
                row.profile.backbone_id,
                row.meta.dataset,
                row.meta.language,
                row.meta.aetiology,
                row.meta.severity,
                row.meta.severity_source,
                str(row.profile.n_phones),
            ]
            for feature in FULL15 + (COMPOSITE,):
                value = row.get(feature)
                cells.append("" if value is None else repr(value))
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv_text(), encoding="utf-8")

    @classmethod
    def from_csv_text(cls, text: str) -> "ProfileTable":
        lines = [ln for ln in text.splitlines() if ln]
        if not lines or lines[0].split(",") != list(CSV_COLUMNS):
            raise CorpusError("unexpected profile CSV header")
        rows = []
        for ln in lines[1:]:
            cells = ln.split(",")
            if len(cells) != len(CSV_COLUMNS):
                raise CorpusError(f"bad profile CSV row: {ln!r}")
            rec = dict(zip(CSV_COLUMNS, cells))
            meta = SpeakerMeta(
                speaker_id=rec["speaker_id"],
                dataset=rec["dataset"],
                language=rec["language"],
                aetiology=rec["aetiology"],
                severity=rec["severity"],
                severity_source=rec["severity_source"],
            )
            values = {
                f: (None if rec[f] == "" else float(rec[f])) for f in FULL15
            }
            profile = SpeakerProfile(
                speaker_id=rec["speaker_id"],
                backbone_id=rec["backbone_id"],
                values=values,
                n_phones=int(rec["n_phones"]),
            )
            rows.append(ProfileRow(meta, profile))
        return cls(rows)

    @classmethod
    def read_csv(cls, path: str | Path) -> "ProfileTable":
        return cls.from_csv_text(Path(path).read_text(encoding="utf-8"))


def assemble_profiles(
    corpus: Corpus,
    directions: dict[str, DirectionSet | None],
    feature_configs: dict[str, FeatureConfig],
) -> ProfileTable:
    """Build the profile table for every speaker in the corpus.

    Speakers whose language has no direction set get missing segmental
    features and a finding; n_phones and timing metrics are still computed.
    """
    rows: list[ProfileRow] = []
    findings: list[str] = []
    for meta in corpus.manifest.speakers:
        fc = feature_configs.get(meta.language)
        if fc is None:
            findings.append(f"{meta.speaker_id}: no feature config for {meta.language}")
            continue
        ds = directions.get(meta.language)
        profile, warnings = build_speaker_profile(corpus, meta.speaker_id, ds, fc)
        findings.extend(warnings)
        rows.append(ProfileRow(meta=meta, profile=profile))
    return ProfileTable(rows=rows, findings=findings)
