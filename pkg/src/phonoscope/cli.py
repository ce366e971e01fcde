"""Command-line entry point.

Subcommands: validate, profiles, analyze <id>, synth, selftest. All runs are
driven by a single JSON configuration document; ``--output`` and ``--seed``
override individual keys. Outputs are namespaced by a hash of the effective
configuration so reruns never overwrite earlier artifacts, and every run
writes ``run_meta.json`` with the config hash, seed and tool version.

Exit codes: 0 success, 1 corpus error or failed validation, 2 invalid
configuration, 3 analysis error.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import __version__
from .analyses import (
    ALL_ANALYSIS_IDS,
    CORPUS_ANALYSES,
    MULTI_TABLE_ANALYSES,
    TABLE_ANALYSES,
    stipancic_map,
)
from .corpus import Corpus, Manifest, read_corpus, validate_corpus
from .errors import AnalysisError, ConfigError, CorpusError, PhonoscopeError
from .feature_config import FeatureConfig, load_feature_config_file
from .profiles import estimate_directions
from .report import write_report
from .synth import SynthSpec, generate_corpus, ledger_check
from .table import ProfileTable, assemble_profiles
from .errors import NoHealthyControls

EXIT_OK = 0
EXIT_CORPUS = 1
EXIT_CONFIG = 2
EXIT_ANALYSIS = 3

_CONFIG_KEYS = {
    "corpus_root",
    "backbone_ids",
    "feature_config_dir",
    "output_dir",
    "seed",
    "severity_override",
    "analyses",
    "synth",
}


@dataclass
class RunConfig:
    corpus_root: Path
    backbone_ids: list[str]
    output_dir: Path
    seed: int
    feature_config_dir: Path | None = None
    severity_override: bool = False
    analyses: dict[str, dict] = field(default_factory=dict)
    synth: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path: str | Path, output: str | None, seed: int | None) -> "RunConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(doc) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if seed is None and "seed" not in doc:
            raise ConfigError("seed is mandatory (config key or --seed)")
        effective_seed = seed if seed is not None else int(doc["seed"])
        if effective_seed < 0:
            raise ConfigError("seed must be a non-negative integer")

        analyses_doc = doc.get("analyses", [])
        analyses: dict[str, dict] = {}
        if isinstance(analyses_doc, dict):
            entries = [{"id": k, "params": v} for k, v in analyses_doc.items()]
        elif isinstance(analyses_doc, list):
            entries = analyses_doc
        else:
            raise ConfigError("analyses must be a list or object")
        for entry in entries:
            if not isinstance(entry, dict) or "id" not in entry:
                raise ConfigError(f"bad analyses entry: {entry!r}")
            aid = entry["id"]
            if aid not in ALL_ANALYSIS_IDS:
                raise ConfigError(f"unknown analysis id {aid!r} (known: {ALL_ANALYSIS_IDS})")
            params = entry.get("params", {})
            if not isinstance(params, dict):
                raise ConfigError(f"params for {aid} must be an object")
            analyses[aid] = params

        base = path.parent

        def respath(value: str) -> Path:
            p = Path(value)
            return p if p.is_absolute() else base / p

        fc_dir = doc.get("feature_config_dir")
        corpus_root = respath(str(doc.get("corpus_root", "corpus")))
        return cls(
            corpus_root=corpus_root,
            backbone_ids=list(doc.get("backbone_ids", [])),
            output_dir=respath(output if output is not None else str(doc.get("output_dir", "out"))),
            seed=effective_seed,
            feature_config_dir=respath(str(fc_dir)) if fc_dir is not None else None,
            severity_override=bool(doc.get("severity_override", False)),
            analyses=analyses,
            synth=dict(doc.get("synth", {})),
        )

    def canonical_json(self) -> str:
        doc = {
            "corpus_root": str(self.corpus_root),
            "backbone_ids": self.backbone_ids,
            "feature_config_dir": (
                str(self.feature_config_dir) if self.feature_config_dir else None
            ),
            "output_dir": str(self.output_dir),
            "seed": self.seed,
            "severity_override": self.severity_override,
            "analyses": self.analyses,
            "synth": self.synth,
        }
        return json.dumps(doc, sort_keys=True)

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:12]


def _threads_cap() -> int | None:
    raw = os.environ.get("PHONOSCOPE_THREADS")
    if raw is None:
        return None
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigError(f"PHONOSCOPE_THREADS must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ConfigError("PHONOSCOPE_THREADS must be >= 1")
    return value


def _run_dir(config: RunConfig, command: str) -> Path:
    out = config.output_dir / config.config_hash()
    out.mkdir(parents=True, exist_ok=True)
    meta = {
        "command": command,
        "config_hash": config.config_hash(),
        "seed": config.seed,
        "version": __version__,
        "threads_cap": _threads_cap(),
    }
    (out / "run_meta.json").write_text(
        json.dumps(meta, indent=1, sort_keys=True) + "\n", encoding="utf-8"
    )
    return out


def _load_feature_configs(config: RunConfig) -> dict[str, FeatureConfig]:
    fc_dir = config.feature_config_dir
    if fc_dir is None:
        fc_dir = config.corpus_root / "feature_configs"
    if not Path(fc_dir).is_dir():
        raise ConfigError(f"feature config directory not found: {fc_dir}")
    configs: dict[str, FeatureConfig] = {}
    for path in sorted(Path(fc_dir).glob("*.json")):
        fc = load_feature_config_file(path)
        configs[fc.language] = fc
    if not configs:
        raise ConfigError(f"no feature configurations in {fc_dir}")
    return configs


def _apply_severity_override(corpus: Corpus) -> Corpus:
    speakers = []
    for s in corpus.manifest.speakers:
        if s.intelligibility_pct is not None:
            speakers.append(
                replace(
                    s,
                    severity=stipancic_map(s.intelligibility_pct),
                    severity_source="threshold",
                )
            )
        else:
            speakers.append(s)
    manifest = Manifest(
        corpus_name=corpus.manifest.corpus_name,
        backbone_id=corpus.manifest.backbone_id,
        dim=corpus.manifest.dim,
        speakers=tuple(speakers),
    )
    return dataclasses.replace(corpus, manifest=manifest)


def _read_backbone(config: RunConfig, backbone_id: str) -> Corpus:
    corpus = read_corpus(config.corpus_root, backbone_id)
    if config.severity_override:
        corpus = _apply_severity_override(corpus)
    return corpus


def _build_table(
    config: RunConfig, backbone_id: str, feature_configs: dict[str, FeatureConfig]
) -> ProfileTable:
    corpus = _read_backbone(config, backbone_id)
    directions = {}
    for language in corpus.languages():
        fc = feature_configs.get(language)
        if fc is None:
            continue
        try:
            directions[language] = estimate_directions(corpus, language, fc)
        except NoHealthyControls:
            directions[language] = None
    return assemble_profiles(corpus, directions, feature_configs)


def _backbone_ids(config: RunConfig) -> list[str]:
    if config.backbone_ids:
        return config.backbone_ids
    from .corpus import read_manifest

    return sorted(read_manifest(config.corpus_root).get("backbones", {}))


def cmd_validate(config: RunConfig) -> int:
    out = _run_dir(config, "validate")
    feature_configs = _load_feature_configs(config)
    any_errors = False
    for backbone_id in _backbone_ids(config):
        corpus = _read_backbone(config, backbone_id)
        report = validate_corpus(corpus, feature_configs)
        lines = report.lines()
        text = "\n".join(lines) + ("\n" if lines else "")
        (out / f"validate_{backbone_id}.txt").write_text(text, encoding="utf-8")
        for line in lines:
            print(f"{backbone_id}: {line}")
        print(
            f"{backbone_id}: {len(report.errors)} error(s), "
            f"{len(report.findings)} finding(s) total"
        )
        if report.errors:
            any_errors = True
    return EXIT_CORPUS if any_errors else EXIT_OK


def cmd_profiles(config: RunConfig) -> int:
    out = _run_dir(config, "profiles")
    feature_configs = _load_feature_configs(config)
    all_rows = []
    findings: list[str] = []
    for backbone_id in _backbone_ids(config):
        table = _build_table(config, backbone_id, feature_configs)
        all_rows.extend(table.rows)
        findings.extend(table.findings)
    combined = ProfileTable(all_rows, findings)
    combined.write_csv(out / "profiles.csv")
    for line in findings:
        print(line)
    print(f"wrote {out / 'profiles.csv'} ({len(combined)} rows)")
    return EXIT_OK


def _validate_params(analysis_id: str, func, params: dict) -> None:
    import inspect

    accepted = {
        name
        for name, p in inspect.signature(func).parameters.items()
        if p.kind in (p.KEYWORD_ONLY, p.POSITIONAL_OR_KEYWORD)
    }
    unknown = set(params) - accepted
    if unknown:
        raise ConfigError(
            f"unknown parameter(s) for {analysis_id}: {sorted(unknown)} "
            f"(accepted: {sorted(accepted)})"
        )


def parse_param_overrides(pairs: list[str]) -> dict:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"--param expects KEY=VALUE, got {pair!r}")
        key, raw = pair.split("=", 1)
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def cmd_analyze(config: RunConfig, analysis_id: str) -> int:
    if analysis_id not in ALL_ANALYSIS_IDS:
        raise ConfigError(f"unknown analysis id {analysis_id!r} (known: {ALL_ANALYSIS_IDS})")
    out = _run_dir(config, f"analyze {analysis_id}")
    feature_configs = _load_feature_configs(config)
    params = dict(config.analyses.get(analysis_id, {}))
    params.setdefault("seed", config.seed)
    backbones = _backbone_ids(config)
    if not backbones:
        raise ConfigError("no backbones available")
    func = (
        MULTI_TABLE_ANALYSES.get(analysis_id)
        or CORPUS_ANALYSES.get(analysis_id)
        or TABLE_ANALYSES[analysis_id]
    )
    _validate_params(analysis_id, func, params)

    if analysis_id in MULTI_TABLE_ANALYSES:
        tables = {
            bid: _build_table(config, bid, feature_configs) for bid in backbones
        }
        report = MULTI_TABLE_ANALYSES[analysis_id](tables, **params)
    elif analysis_id in CORPUS_ANALYSES:
        corpus = _read_backbone(config, backbones[0])
        params = {k: (tuple(v) if isinstance(v, list) else v) for k, v in params.items()}
        report = CORPUS_ANALYSES[analysis_id](corpus, feature_configs, **params)
    else:
        table = _build_table(config, backbones[0], feature_configs)
        params = {k: (tuple(v) if isinstance(v, list) else v) for k, v in params.items()}
        report = TABLE_ANALYSES[analysis_id](table, **params)

    paths = write_report(report, out, version=__version__)
    for path in paths:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_synth(config: RunConfig) -> int:
    out = _run_dir(config, "synth")
    spec_doc = dict(config.synth)
    spec_doc.setdefault("seed", config.seed)
    spec = SynthSpec.from_dict(spec_doc)
    corpus, _ = generate_corpus(spec, config.corpus_root)
    summary = {
        "corpus_root": str(config.corpus_root),
        "speakers": len(corpus.manifest.speakers),
        "tokens": len(corpus.tokens),
        "embedding_rows": int(corpus.embeddings.shape[0]),
        "dim": corpus.dim,
        "backbone_id": corpus.backbone_id,
    }
    (out / "synth_summary.json").write_text(
        json.dumps(summary, indent=1, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def cmd_selftest(config: RunConfig) -> int:
    out = _run_dir(config, "selftest")
    corpus_dir = out / "selftest_corpus"
    spec_doc = dict(config.synth)
    spec_doc.setdefault("seed", config.seed)
    spec = SynthSpec.from_dict(spec_doc)
    _, ledger = generate_corpus(spec, corpus_dir)

    corpus = read_corpus(corpus_dir, spec.backbone_id)
    report = validate_corpus(corpus)
    if report.errors:
        for line in report.lines():
            print(line)
        return EXIT_CORPUS

    feature_configs = {
        fc.language: fc
        for fc in (
            load_feature_config_file(p)
            for p in sorted((corpus_dir / "feature_configs").glob("*.json"))
        )
    }
    directions = {}
    for language in corpus.languages():
        directions[language] = estimate_directions(
            corpus, language, feature_configs[language]
        )
    table = assemble_profiles(corpus, directions, feature_configs)
    check = ledger_check(corpus, ledger, table)
    for line in check.lines():
        print(line)
    (out / "selftest_report.txt").write_text(
        "\n".join(check.lines()) + "\n", encoding="utf-8"
    )
    if check.fraction_within < 0.99:
        print("selftest FAILED: less than 99% of cells within tolerance")
        return EXIT_ANALYSIS
    print("selftest OK")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phonoscope",
        description="Phonological-subspace d-prime profiling and analysis",
    )
    parser.add_argument("--version", action="version", version=f"phonoscope {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("validate", "profiles", "synth", "selftest"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--output", default=None)
        p.add_argument("--seed", type=int, default=None)
    p = sub.add_parser("analyze")
    p.add_argument("analysis_id")
    p.add_argument("--config", required=True)
    p.add_argument("--output", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument(
        "--param",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one analysis parameter (value parsed as JSON, else string)",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig.load(args.config, args.output, args.seed)
        if args.command == "validate":
            return cmd_validate(config)
        if args.command == "profiles":
            return cmd_profiles(config)
        if args.command == "analyze":
            overrides = parse_param_overrides(args.param)
            if overrides:
                # Fold overrides into the effective config so the output
                # namespace hash reflects them.
                merged = dict(config.analyses.get(args.analysis_id, {}))
                merged.update(overrides)
                config.analyses[args.analysis_id] = merged
            return cmd_analyze(config, args.analysis_id)
        if args.command == "synth":
            return cmd_synth(config)
        if args.command == "selftest":
            return cmd_selftest(config)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CorpusError as exc:
        print(f"corpus error: {exc}", file=sys.stderr)
        return EXIT_CORPUS
    except AnalysisError as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    except PhonoscopeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())
