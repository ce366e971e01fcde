"""Corpus interchange: manifest JSON, token table TSV, embedding stores.

On-disk layout under a corpus root::

    manifest.json
    tokens.tsv                        # speaker_id utterance_id tier label start_s end_s
    embeddings/<backbone_id>/embeddings.phem
    embeddings/<backbone_id>/rows.tsv # row utterance_id token_ordinal

``tokens.tsv`` is UTF-8 with LF line endings, a header row, and rows sorted
by utterance_id, then tier, then start_s. Times use '.' as the decimal
separator with six decimals. The manifest registers every backbone stored
under the root; a :class:`Corpus` is materialized for one backbone at a time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import (
    CorpusError,
    DimMismatch,
    MissingFile,
    OrphanToken,
    RowCountMismatch,
)
from .feature_config import FeatureConfig, nfc
from .phem import read_phem, write_phem

AETIOLOGIES = ("HC", "PD", "CP", "ALS", "DS", "Stroke", "Other")
MAIN_GROUPS = ("HC", "PD", "CP", "ALS", "DS", "Stroke")
SEVERITIES = ("control", "mild", "moderate", "severe", "unknown")
SEVERITY_ORDINAL = {"control": 0, "mild": 1, "moderate": 2, "severe": 3}
SEVERITY_SOURCES = ("clinical", "threshold", "none")

TOKEN_COLUMNS = ("speaker_id", "utterance_id", "tier", "label", "start_s", "end_s")
MIN_TOKENS_PER_CLASS = 5


@dataclass(frozen=True)
class SpeakerMeta:
    speaker_id: str
    dataset: str
    language: str
    aetiology: str
    severity: str = "unknown"
    severity_source: str = "none"
    intelligibility_pct: float | None = None
    ctc_conf: float | None = None

    def __post_init__(self) -> None:
        if self.aetiology not in AETIOLOGIES:
            raise CorpusError(f"{self.speaker_id}: unknown aetiology {self.aetiology!r}")
        if self.severity not in SEVERITIES:
            raise CorpusError(f"{self.speaker_id}: unknown severity {self.severity!r}")
        if self.severity_source not in SEVERITY_SOURCES:
            raise CorpusError(
                f"{self.speaker_id}: unknown severity_source {self.severity_source!r}"
            )
        if self.severity_source == "threshold" and self.intelligibility_pct is None:
            raise CorpusError(
                f"{self.speaker_id}: threshold-derived severity requires intelligibility_pct"
            )
        for name in ("intelligibility_pct", "ctc_conf"):
            value = getattr(self, name)
            if value is not None:
                lo, hi = (0.0, 100.0) if name == "intelligibility_pct" else (0.0, 1.0)
                if not (lo <= value <= hi):
                    raise CorpusError(f"{self.speaker_id}: {name}={value} outside [{lo}, {hi}]")


@dataclass(frozen=True)
class Manifest:
    corpus_name: str
    backbone_id: str
    dim: int
    speakers: tuple[SpeakerMeta, ...]

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise CorpusError(f"dim must be >= 1, got {self.dim}")
        if not self.backbone_id:
            raise CorpusError("backbone_id must be non-empty")
        ids = [s.speaker_id for s in self.speakers]
        if len(ids) != len(set(ids)):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise CorpusError(f"duplicate speaker_ids: {dupes}")

    def speaker(self, speaker_id: str) -> SpeakerMeta:
        for s in self.speakers:
            if s.speaker_id == speaker_id:
                return s
        raise KeyError(speaker_id)


@dataclass(frozen=True)
class TokenRow:
    speaker_id: str
    utterance_id: str
    tier: str  # "phone" | "word"
    label: str
    start_s: float
    end_s: float


@dataclass(frozen=True)
class Token:
    """A phone token with its embedding row, or a word token (row = None)."""

    label: str
    start_s: float
    end_s: float
    row: int | None = None

    @property
    def duration(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class Utterance:
    utterance_id: str
    phones: tuple[Token, ...]
    words: tuple[Token, ...]


@dataclass
class Corpus:
    manifest: Manifest
    tokens: list[TokenRow]
    embeddings: np.ndarray  # (n_rows, dim) float32
    row_index: list[tuple[str, int]]  # row -> (utterance_id, token_ordinal)
    token_free_speakers: frozenset[str] = frozenset()
    _views: dict[str, tuple[Utterance, ...]] = field(default_factory=dict, repr=False)
    _row_of: dict[tuple[str, int], int] | None = field(default=None, repr=False)
    _tokens_by_speaker: dict[str, list[TokenRow]] | None = field(default=None, repr=False)

    @property
    def backbone_id(self) -> str:
        return self.manifest.backbone_id

    @property
    def dim(self) -> int:
        return self.manifest.dim

    def speakers_of_language(self, language: str) -> list[SpeakerMeta]:
        return [s for s in self.manifest.speakers if s.language == language]

    def languages(self) -> list[str]:
        return sorted({s.language for s in self.manifest.speakers})

    def utterances(self, speaker_id: str) -> tuple[Utterance, ...]:
        """Phone/word tokens of one speaker grouped by utterance, time-ordered."""
        cached = self._views.get(speaker_id)
        if cached is not None:
            return cached
        if self._row_of is None:
            self._row_of = {key: row for row, key in enumerate(self.row_index)}
        if self._tokens_by_speaker is None:
            grouped: dict[str, list[TokenRow]] = {}
            for tok in self.tokens:
                grouped.setdefault(tok.speaker_id, []).append(tok)
            self._tokens_by_speaker = grouped
        row_of = self._row_of
        per_utt: dict[str, dict[str, list[Token]]] = {}
        order: list[str] = []
        for tok in self._tokens_by_speaker.get(speaker_id, ()):
            bucket = per_utt.get(tok.utterance_id)
            if bucket is None:
                bucket = {"phone": [], "word": []}
                per_utt[tok.utterance_id] = bucket
                order.append(tok.utterance_id)
            bucket[tok.tier].append(Token(tok.label, tok.start_s, tok.end_s))
        utts = []
        for utt_id in order:
            phones = sorted(per_utt[utt_id]["phone"], key=lambda t: t.start_s)
            phones = [
                replace(t, row=row_of.get((utt_id, ordinal)))
                for ordinal, t in enumerate(phones)
            ]
            words = tuple(sorted(per_utt[utt_id]["word"], key=lambda t: t.start_s))
            utts.append(Utterance(utt_id, tuple(phones), words))
        view = tuple(utts)
        self._views[speaker_id] = view
        return view

    def phone_labels_and_rows(self, speaker_id: str) -> tuple[list[str], list[int]]:
        labels: list[str] = []
        rows: list[int] = []
        for utt in self.utterances(speaker_id):
            for tok in utt.phones:
                if tok.row is not None:
                    labels.append(tok.label)
                    rows.append(tok.row)
        return labels, rows


# ------------------------------------------------------------------ IO


def _format_time(value: float) -> str:
    return f"{value:.6f}"


def _speaker_to_json(s: SpeakerMeta) -> dict:
    doc = {
        "speaker_id": s.speaker_id,
        "dataset": s.dataset,
        "language": s.language,
        "aetiology": s.aetiology,
        "severity": s.severity,
        "severity_source": s.severity_source,
    }
    if s.intelligibility_pct is not None:
        doc["intelligibility_pct"] = s.intelligibility_pct
    if s.ctc_conf is not None:
        doc["ctc_conf"] = s.ctc_conf
    return doc


def _speaker_from_json(doc: dict) -> SpeakerMeta:
    try:
        return SpeakerMeta(
            speaker_id=str(doc["speaker_id"]),
            dataset=str(doc["dataset"]),
            language=str(doc["language"]),
            aetiology=str(doc["aetiology"]),
            severity=str(doc.get("severity", "unknown")),
            severity_source=str(doc.get("severity_source", "none")),
            intelligibility_pct=doc.get("intelligibility_pct"),
            ctc_conf=doc.get("ctc_conf"),
        )
    except KeyError as exc:
        raise CorpusError(f"manifest speaker entry missing {exc}") from exc


def read_manifest(root: str | Path) -> dict:
    path = Path(root) / "manifest.json"
    if not path.is_file():
        raise MissingFile(str(path))
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusError(f"{path}: invalid JSON: {exc}") from exc
    for key in ("corpus_name", "backbones", "speakers"):
        if key not in doc:
            raise CorpusError(f"{path}: missing key {key!r}")
    return doc


def _read_tokens(path: Path) -> list[TokenRow]:
    if not path.is_file():
        raise MissingFile(str(path))
    rows: list[TokenRow] = []
    with open(path, encoding="utf-8", newline="") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if tuple(header) != TOKEN_COLUMNS:
            raise CorpusError(f"{path}: unexpected header {header}")
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split("\t")
            if len(parts) != len(TOKEN_COLUMNS):
                raise CorpusError(f"{path}:{lineno}: expected 6 columns, got {len(parts)}")
            speaker_id, utt_id, tier, label, start_s, end_s = parts
            if tier not in ("phone", "word"):
                raise CorpusError(f"{path}:{lineno}: unknown tier {tier!r}")
            try:
                start, end = float(start_s), float(end_s)
            except ValueError as exc:
                raise CorpusError(f"{path}:{lineno}: bad time field") from exc
            rows.append(TokenRow(speaker_id, utt_id, tier, nfc(label), start, end))
    return rows


def read_corpus(root: str | Path, backbone_id: str) -> Corpus:
    """Materialize the corpus stored at *root* for one backbone.

    Every phone token must map to exactly one embedding row and vice versa.
    Speakers without tokens are retained and flagged in
    ``token_free_speakers``.
    """
    root = Path(root)
    doc = read_manifest(root)
    backbones = doc["backbones"]
    if backbone_id not in backbones:
        raise MissingFile(f"backbone {backbone_id!r} not registered in {root / 'manifest.json'}")
    dim = int(backbones[backbone_id]["dim"])
    speakers = tuple(_speaker_from_json(s) for s in doc["speakers"])
    manifest = Manifest(
        corpus_name=str(doc["corpus_name"]),
        backbone_id=backbone_id,
        dim=dim,
        speakers=speakers,
    )

    tokens = _read_tokens(root / "tokens.tsv")
    known = {s.speaker_id for s in speakers}
    for tok in tokens:
        if tok.speaker_id not in known:
            raise CorpusError(f"tokens.tsv references unknown speaker {tok.speaker_id!r}")

    emb_dir = root / "embeddings" / backbone_id
    embeddings = read_phem(emb_dir / "embeddings.phem")
    if embeddings.shape[1] != dim:
        raise DimMismatch(
            f"{emb_dir}: manifest dim {dim} != stored dim {embeddings.shape[1]}"
        )

    rows_path = emb_dir / "rows.tsv"
    if not rows_path.is_file():
        raise MissingFile(str(rows_path))
    row_index: list[tuple[str, int]] = []
    with open(rows_path, encoding="utf-8", newline="") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if tuple(header) != ("row", "utterance_id", "token_ordinal"):
            raise CorpusError(f"{rows_path}: unexpected header {header}")
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 3:
                raise CorpusError(f"{rows_path}:{lineno}: expected 3 columns")
            row, utt_id, ordinal = parts
            if int(row) != len(row_index):
                raise CorpusError(f"{rows_path}:{lineno}: rows must be dense and ordered")
            row_index.append((utt_id, int(ordinal)))
    if len(row_index) != embeddings.shape[0]:
        raise RowCountMismatch(
            f"{emb_dir}: rows.tsv has {len(row_index)} rows, "
            f"embeddings.phem has {embeddings.shape[0]}"
        )

    # Bijection check: phone tokens <-> embedding rows.
    phone_keys: dict[tuple[str, int], int] = {}
    per_utt_ordinal: dict[str, int] = {}
    for tok in sorted(
        (t for t in tokens if t.tier == "phone"),
        key=lambda t: (t.utterance_id, t.start_s),
    ):
        ordinal = per_utt_ordinal.get(tok.utterance_id, 0)
        per_utt_ordinal[tok.utterance_id] = ordinal + 1
        phone_keys[(tok.utterance_id, ordinal)] = 0
    index_keys = set(row_index)
    if len(index_keys) != len(row_index):
        raise OrphanToken("rows.tsv maps two rows to the same token")
    missing = set(phone_keys) - index_keys
    if missing:
        example = sorted(missing)[0]
        raise OrphanToken(
            f"{len(missing)} phone token(s) without an embedding row, e.g. {example}"
        )
    extra = index_keys - set(phone_keys)
    if extra:
        example = sorted(extra)[0]
        raise OrphanToken(
            f"{len(extra)} embedding row(s) without a phone token, e.g. {example}"
        )

    with_tokens = {t.speaker_id for t in tokens}
    token_free = frozenset(known - with_tokens)
    return Corpus(
        manifest=manifest,
        tokens=tokens,
        embeddings=embeddings,
        row_index=row_index,
        token_free_speakers=token_free,
    )


def write_corpus(corpus: Corpus, root: str | Path) -> None:
    """Write the interchange files for *corpus* under *root*.

    Embedding bytes and row order are preserved verbatim so that a
    read/write cycle is byte-identical.
    """
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    manifest_path = root / "manifest.json"
    backbones: dict[str, dict] = {}
    if manifest_path.is_file():
        try:
            backbones = dict(json.loads(manifest_path.read_text(encoding="utf-8")).get("backbones", {}))
        except json.JSONDecodeError:
            backbones = {}
    backbones[corpus.backbone_id] = {"dim": corpus.dim}
    doc = {
        "corpus_name": corpus.manifest.corpus_name,
        "backbones": {k: backbones[k] for k in sorted(backbones)},
        "speakers": [_speaker_to_json(s) for s in corpus.manifest.speakers],
    }
    manifest_path.write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    ordered = sorted(corpus.tokens, key=lambda t: (t.utterance_id, t.tier, t.start_s))
    lines = ["\t".join(TOKEN_COLUMNS)]
    for tok in ordered:
        lines.append(
            "\t".join(
                (
                    tok.speaker_id,
                    tok.utterance_id,
                    tok.tier,
                    tok.label,
                    _format_time(tok.start_s),
                    _format_time(tok.end_s),
                )
            )
        )
    (root / "tokens.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    emb_dir = root / "embeddings" / corpus.backbone_id
    emb_dir.mkdir(parents=True, exist_ok=True)
    write_phem(emb_dir / "embeddings.phem", corpus.embeddings)
    rows = ["\t".join(("row", "utterance_id", "token_ordinal"))]
    for row, (utt_id, ordinal) in enumerate(corpus.row_index):
        rows.append(f"{row}\t{utt_id}\t{ordinal}")
    (emb_dir / "rows.tsv").write_text("\n".join(rows) + "\n", encoding="utf-8")


# ------------------------------------------------------------ validation


@dataclass(frozen=True)
class Finding:
    severity: str  # "error" | "warning" | "info"
    code: str
    message: str


@dataclass
class ValidationReport:
    findings: list[Finding]
    feature_counts: dict[str, dict[str, tuple[int, int]]]
    # speaker_id -> feature -> (n_pos, n_neg)

    @property
    def errors(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "error"]

    def lines(self) -> list[str]:
        return [f"{f.severity.upper()} [{f.code}] {f.message}" for f in self.findings]


def validate_corpus(
    corpus: Corpus, feature_configs: dict[str, FeatureConfig] | None = None
) -> ValidationReport:
    """Check corpus invariants and report findings without mutating anything.

    With feature configurations supplied, also counts tokens per feature
    class per speaker and reports which features fall below the minimum
    token rule.
    """
    findings: list[Finding] = []
    counts: dict[str, dict[str, tuple[int, int]]] = {}

    bad = ~np.isfinite(corpus.embeddings)
    if bad.any():
        for row in np.flatnonzero(bad.any(axis=1)):
            utt_id, ordinal = corpus.row_index[row]
            findings.append(
                Finding(
                    "error",
                    "nan_embedding",
                    f"embedding row {row} ({utt_id}, ordinal {ordinal}) has non-finite values",
                )
            )

    by_tier: dict[tuple[str, str], list[TokenRow]] = {}
    for tok in corpus.tokens:
        if tok.end_s <= tok.start_s:
            findings.append(
                Finding(
                    "error",
                    "bad_interval",
                    f"{tok.utterance_id}/{tok.tier}: token {tok.label!r} has end <= start",
                )
            )
        by_tier.setdefault((tok.utterance_id, tok.tier), []).append(tok)
    for (utt_id, tier), toks in by_tier.items():
        ordered = sorted(toks, key=lambda t: t.start_s)
        for prev, cur in zip(ordered, ordered[1:]):
            if cur.start_s < prev.end_s - 1e-9:
                findings.append(
                    Finding(
                        "error",
                        "overlap",
                        f"{utt_id}/{tier}: tokens {prev.label!r} and {cur.label!r} overlap",
                    )
                )

    utt_owner: dict[str, str] = {}
    for tok in corpus.tokens:
        owner = utt_owner.setdefault(tok.utterance_id, tok.speaker_id)
        if owner != tok.speaker_id:
            findings.append(
                Finding(
                    "error",
                    "shared_utterance",
                    f"utterance {tok.utterance_id} claimed by {owner} and {tok.speaker_id}",
                )
            )
            break

    for speaker_id in sorted(corpus.token_free_speakers):
        findings.append(
            Finding("warning", "token_free_speaker", f"speaker {speaker_id} has no tokens")
        )

    if feature_configs is not None:
        for meta in corpus.manifest.speakers:
            fc = feature_configs.get(meta.language)
            if fc is None:
                findings.append(
                    Finding(
                        "warning",
                        "no_feature_config",
                        f"no feature configuration for language {meta.language!r}",
                    )
                )
                continue
            labels, _ = corpus.phone_labels_and_rows(meta.speaker_id)
            tally: dict[str, int] = {}
            for label in labels:
                tally[label] = tally.get(label, 0) + 1
            per_feature: dict[str, tuple[int, int]] = {}
            for feature, klass in fc.features.items():
                n_pos = sum(tally.get(p, 0) for p in klass.pos)
                n_neg = sum(tally.get(p, 0) for p in klass.neg)
                per_feature[feature] = (n_pos, n_neg)
                if min(n_pos, n_neg) < MIN_TOKENS_PER_CLASS:
                    low = min(n_pos, n_neg)
                    findings.append(
                        Finding(
                            "info",
                            "feature_unavailable",
                            f"feature {feature} unavailable for {meta.speaker_id} "
                            f"({low} < {MIN_TOKENS_PER_CLASS} per class)",
                        )
                    )
            counts[meta.speaker_id] = per_feature

    return ValidationReport(findings=findings, feature_counts=counts)
