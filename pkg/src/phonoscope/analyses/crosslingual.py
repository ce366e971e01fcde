"""Cross-lingual stability of aetiology-specific consonant profiles."""

from __future__ import annotations

from itertools import combinations

import numpy as np

from ..corpus import MAIN_GROUPS
from ..errors import NoQualifyingLanguagePair
from ..profiles import CONSONANT5
from ..report import AnalysisReport, Grid
from ..stats import bootstrap_ci, cosine
from ..table import ProfileRow, ProfileTable

SWEEP_THRESHOLDS = (1, 3, 5, 10)


def _consonant_vector(rows: list[ProfileRow]) -> np.ndarray:
    mat = np.asarray([[r.get(f) for f in CONSONANT5] for r in rows], dtype=float)
    return mat.mean(axis=0)


def _mean_pairwise_cosine(profiles: dict[str, np.ndarray]) -> tuple[float, float, float]:
    pairs = [
        cosine(profiles[a], profiles[b]) for a, b in combinations(sorted(profiles), 2)
    ]
    return float(np.mean(pairs)), float(min(pairs)), float(max(pairs))


def crosslingual_consistency(
    table: ProfileTable,
    *,
    aetiologies: tuple[str, ...] = MAIN_GROUPS,
    min_n: int = 3,
    min_hc: int = 1,
    n_boot: int = 1000,
    n_perm: int = 1000,
    seed: int,
) -> AnalysisReport:
    """Pairwise cosine similarity of per-language mean consonant profiles.

    A language qualifies for an aetiology when it has at least *min_n*
    speakers of that aetiology with all five consonant d-primes and at least
    *min_hc* such HC speakers. The permutation null shuffles aetiology
    labels within each language; its p-value uses the >= convention with +1
    smoothing so it is never exactly zero. A min-n sweep reports mean cosine
    at increasing thresholds.
    """
    report = AnalysisReport(
        analysis_id="crosslingual_consistency",
        parameters={
            "aetiologies": list(aetiologies),
            "min_n": min_n,
            "min_hc": min_hc,
            "n_boot": n_boot,
            "n_perm": n_perm,
        },
        seed=seed,
    )
    complete = [r for r in table.rows if all(r.get(f) is not None for f in CONSONANT5)]
    by_language: dict[str, list[ProfileRow]] = {}
    for row in complete:
        by_language.setdefault(row.meta.language, []).append(row)
    hc_counts = {
        lang: sum(1 for r in rows if r.meta.aetiology == "HC")
        for lang, rows in by_language.items()
    }

    def qualifying_languages(aet: str, threshold: int) -> list[str]:
        out = []
        for lang, rows in sorted(by_language.items()):
            n_aet = sum(1 for r in rows if r.meta.aetiology == aet)
            if n_aet >= threshold and hc_counts.get(lang, 0) >= min_hc:
                out.append(lang)
        return out

    summary: dict[tuple[str, str], float | None] = {}
    sweep: dict[tuple[str, str], float | None] = {}
    processed: list[str] = []

    for aet_idx, aet in enumerate(aetiologies):
        langs = qualifying_languages(aet, min_n)
        for threshold in sorted(set(SWEEP_THRESHOLDS) | {min_n}):
            sw_langs = qualifying_languages(aet, threshold)
            col = f"min_n={threshold}"
            sweep[(aet, col)] = None
            sweep[(aet, f"languages_at_{threshold}")] = float(len(sw_langs))
            if len(sw_langs) >= 2:
                profs = {
                    lang: _consonant_vector(
                        [r for r in by_language[lang] if r.meta.aetiology == aet]
                    )
                    for lang in sw_langs
                }
                sweep[(aet, col)], _, _ = _mean_pairwise_cosine(profs)

        if len(langs) < 2:
            report.findings.append(
                f"{aet}: {len(langs)} qualifying language(s) at min_n={min_n}, skipped"
            )
            continue
        processed.append(aet)

        cell_rows = {
            lang: [r for r in by_language[lang] if r.meta.aetiology == aet]
            for lang in langs
        }
        profiles = {lang: _consonant_vector(rows) for lang, rows in cell_rows.items()}
        mean_cos, min_cos, max_cos = _mean_pairwise_cosine(profiles)
        summary[(aet, "n_languages")] = float(len(langs))
        summary[(aet, "mean_cosine")] = mean_cos
        summary[(aet, "min_cosine")] = min_cos
        summary[(aet, "max_cosine")] = max_cos

        pair_grid: dict[tuple[str, str], float | None] = {}
        for a, b in combinations(langs, 2):
            c = cosine(profiles[a], profiles[b])
            pair_grid[(a, b)] = c
            pair_grid[(b, a)] = c
        report.add_table(f"pairwise_{aet}", Grid.from_dict(langs, langs, pair_grid))
        prof_grid = {
            (lang, f): float(profiles[lang][i])
            for lang in langs
            for i, f in enumerate(CONSONANT5)
        }
        report.add_table(f"profiles_{aet}", Grid.from_dict(langs, list(CONSONANT5), prof_grid))

        # Bootstrap over speakers within each language cell.
        flat: list[tuple[str, ProfileRow]] = [
            (lang, r) for lang in langs for r in cell_rows[lang]
        ]
        strata = [lang for lang, _ in flat]

        def boot_stat(sample: list[tuple[str, ProfileRow]]) -> float:
            grouped: dict[str, list[ProfileRow]] = {}
            for lang, row in sample:
                grouped.setdefault(lang, []).append(row)
            profs = {lang: _consonant_vector(rows) for lang, rows in grouped.items()}
            return _mean_pairwise_cosine(profs)[0]

        ci = bootstrap_ci(
            flat, boot_stat, n_resamples=n_boot, seed=seed + 1000 + aet_idx, strata=strata
        )
        summary[(aet, "ci_lower")] = ci.lower
        summary[(aet, "ci_upper")] = ci.upper

        # Permutation null: shuffle aetiology labels within each language.
        null_count = 0
        valid_perms = 0
        for p in range(n_perm):
            rng = np.random.default_rng([seed, aet_idx, p])
            profs: dict[str, np.ndarray] = {}
            for lang in langs:
                pool = by_language[lang]
                n_cell = len(cell_rows[lang])
                picks = rng.permutation(len(pool))[:n_cell]
                profs[lang] = _consonant_vector([pool[i] for i in picks])
            try:
                null_mean, _, _ = _mean_pairwise_cosine(profs)
            except Exception:
                continue
            valid_perms += 1
            if null_mean >= mean_cos - 1e-12:
                null_count += 1
        perm_p = (1 + null_count) / (1 + valid_perms) if valid_perms else None
        summary[(aet, "perm_p")] = perm_p
        summary[(aet, "n_perm")] = float(valid_perms)

    if not processed:
        raise NoQualifyingLanguagePair(
            f"no aetiology has >= 2 qualifying languages at min_n={min_n}, min_hc={min_hc}"
        )

    report.add_table(
        "summary",
        Grid.from_dict(
            processed,
            [
                "n_languages",
                "mean_cosine",
                "min_cosine",
                "max_cosine",
                "ci_lower",
                "ci_upper",
                "perm_p",
                "n_perm",
            ],
            summary,
        ),
    )
    sweep_cols: list[str] = []
    for threshold in sorted(set(SWEEP_THRESHOLDS) | {min_n}):
        sweep_cols.extend([f"min_n={threshold}", f"languages_at_{threshold}"])
    report.add_table("min_n_sweep", Grid.from_dict(list(aetiologies), sweep_cols, sweep))
    return report
