"""End-to-end extraction: audio + TextGrids -> interchange corpus directory.

Expected input layout::

    audio_dir/<speaker_id>/<utterance>.wav
    textgrid_dir/<speaker_id>/<utterance>.TextGrid

plus an optional ``speakers.json`` in audio_dir mapping speaker ids to
metadata overrides (dataset, language, aetiology, severity, severity_source,
intelligibility_pct, ctc_conf).

Outputs under the corpus root: ``manifest.json``, ``tokens.tsv`` (shared
across backbones), ``embeddings/<backbone_id>/embeddings.phem`` and
``rows.tsv``. Extraction is deterministic; re-running against existing
outputs verifies byte equality and raises ChecksumMismatch on drift.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .audio import load_pipeline_audio
from .backbones import make_backbone
from .errors import BadTextGrid, ChecksumMismatch, EmptyUtterance, MissingTextGrid
from .phem import phem_bytes
from .pooling import pool_frames
from .textgrid import read_textgrid

TOKEN_COLUMNS = ("speaker_id", "utterance_id", "tier", "label", "start_s", "end_s")
DEFAULT_META = {
    "dataset": "extracted",
    "language": "en",
    "aetiology": "Other",
    "severity": "unknown",
    "severity_source": "none",
}


@dataclass
class ExtractionJob:
    audio_dir: Path
    textgrid_dir: Path
    backbone: str
    out_dir: Path
    layer: str | int = "last"
    phone_tier: str = "phones"
    word_tier: str = "words"
    corpus_name: str = "extracted"
    language: str = "en"
    dataset: str = "extracted"
    speaker_meta: dict[str, dict] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.audio_dir = Path(self.audio_dir)
        self.textgrid_dir = Path(self.textgrid_dir)
        self.out_dir = Path(self.out_dir)
        sidecar = self.audio_dir / "speakers.json"
        if sidecar.is_file() and not self.speaker_meta:
            self.speaker_meta = json.loads(sidecar.read_text(encoding="utf-8"))


def _nfc(label: str) -> str:
    return unicodedata.normalize("NFC", label)


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def _write_or_check(path: Path, blob: bytes) -> None:
    if path.exists():
        if path.read_bytes() != blob:
            raise ChecksumMismatch(f"{path}: existing output differs from re-extraction")
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(blob)


def _utterances(job: ExtractionJob) -> list[tuple[str, str, Path, Path]]:
    """(speaker_id, utterance stem, wav path, textgrid path), sorted."""
    out = []
    for wav in sorted(job.audio_dir.rglob("*.wav")):
        speaker_id = wav.parent.name if wav.parent != job.audio_dir else wav.stem
        rel = wav.relative_to(job.audio_dir).with_suffix(".TextGrid")
        grid = job.textgrid_dir / rel
        if not grid.is_file():
            raise MissingTextGrid(f"no TextGrid for {wav} (expected {grid})")
        out.append((speaker_id, wav.stem, wav, grid))
    return out


def extract(job: ExtractionJob) -> Path:
    """Run extraction; returns the corpus root directory."""
    backbone = make_backbone(job.backbone, job.layer)
    items = _utterances(job)

    token_lines: list[tuple[str, str, str, str, float, float]] = []
    row_entries: list[tuple[str, int]] = []
    vectors: list[np.ndarray] = []
    speakers_seen: dict[str, None] = {}

    for speaker_id, stem, wav, grid_path in items:
        speakers_seen.setdefault(speaker_id, None)
        utt_id = f"{speaker_id}-{stem}"
        samples = load_pipeline_audio(wav)
        frames = backbone.frames(samples)
        tiers = read_textgrid(grid_path)
        if job.phone_tier not in tiers:
            raise BadTextGrid(f"{grid_path}: missing tier {job.phone_tier!r}")
        phones = [iv for iv in tiers[job.phone_tier] if iv.label.strip()]
        phones.sort(key=lambda iv: iv.xmin)
        words = [iv for iv in tiers.get(job.word_tier, []) if iv.label.strip()]
        words.sort(key=lambda iv: iv.xmin)

        for ordinal, iv in enumerate(phones):
            try:
                vec = pool_frames(frames, (iv.xmin, iv.xmax))
            except EmptyUtterance as exc:
                raise EmptyUtterance(f"{wav}: {exc}") from exc
            vectors.append(vec.astype("<f4"))
            row_entries.append((utt_id, ordinal))
            token_lines.append(
                (speaker_id, utt_id, "phone", _nfc(iv.label), iv.xmin, iv.xmax)
            )
        for iv in words:
            token_lines.append(
                (speaker_id, utt_id, "word", _nfc(iv.label), iv.xmin, iv.xmax)
            )

    token_lines.sort(key=lambda t: (t[1], t[2], t[4]))
    tokens_text = "\t".join(TOKEN_COLUMNS) + "\n"
    tokens_text += "".join(
        f"{s}\t{u}\t{tier}\t{label}\t{_fmt(a)}\t{_fmt(b)}\n"
        for s, u, tier, label, a, b in token_lines
    )

    matrix = (
        np.stack(vectors)
        if vectors
        else np.zeros((0, backbone.dim), dtype="<f4")
    )
    rows_text = "row\tutterance_id\ttoken_ordinal\n"
    rows_text += "".join(
        f"{row}\t{utt}\t{ordinal}\n" for row, (utt, ordinal) in enumerate(row_entries)
    )

    speakers = []
    for speaker_id in sorted(speakers_seen):
        meta = dict(DEFAULT_META)
        meta["language"] = job.language
        meta["dataset"] = job.dataset
        meta.update(job.speaker_meta.get(speaker_id, {}))
        meta["speaker_id"] = speaker_id
        speakers.append(meta)

    out = job.out_dir
    out.mkdir(parents=True, exist_ok=True)
    manifest_path = out / "manifest.json"
    backbones = {}
    if manifest_path.is_file():
        backbones = dict(
            json.loads(manifest_path.read_text(encoding="utf-8")).get("backbones", {})
        )
    backbones[backbone.backbone_id] = {"dim": backbone.dim}
    manifest = {
        "corpus_name": job.corpus_name,
        "backbones": {k: backbones[k] for k in sorted(backbones)},
        "speakers": speakers,
    }
    manifest_blob = (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode()
    # The manifest legitimately changes when a new backbone is registered.
    if manifest_path.is_file() and manifest_path.read_bytes() != manifest_blob:
        old = json.loads(manifest_path.read_text(encoding="utf-8"))
        old_backbones = old.pop("backbones", {})
        new = dict(manifest)
        new_backbones = new.pop("backbones", {})
        if old != new or any(
            old_backbones.get(k, v) != v for k, v in new_backbones.items()
        ):
            raise ChecksumMismatch(f"{manifest_path}: existing manifest differs")
    manifest_path.write_bytes(manifest_blob)

    _write_or_check(out / "tokens.tsv", tokens_text.encode())
    emb_dir = out / "embeddings" / backbone.backbone_id
    _write_or_check(emb_dir / "embeddings.phem", phem_bytes(matrix))
    _write_or_check(emb_dir / "rows.tsv", rows_text.encode())
    return out
