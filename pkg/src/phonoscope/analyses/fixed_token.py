"""Fixed-token d-prime: recompute d' from exactly N subsampled tokens/class."""

from __future__ import annotations

import hashlib

import numpy as np

from ..corpus import MAIN_GROUPS, SEVERITY_ORDINAL, Corpus
from ..errors import (
    AnalysisError,
    ConstantInput,
    EmptyGroup,
    NoHealthyControls,
    NoQualifyingSpeakers,
    TooFewGroups,
    TooFewPairs,
)
from ..feature_config import FeatureConfig
from ..profiles import CONSONANT5, estimate_directions
from ..report import AnalysisReport, Grid
from ..stats import kruskal_wallis, spearman


def _speaker_stream_key(speaker_id: str) -> int:
    digest = hashlib.blake2s(speaker_id.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def _severity_stats(
    composites: dict[str, float], meta_of: dict, label: str, findings: list[str]
) -> tuple[float | None, float | None]:
    xs, ys = [], []
    for spk, value in composites.items():
        sev = meta_of[spk].severity
        if sev in SEVERITY_ORDINAL:
            xs.append(value)
            ys.append(float(SEVERITY_ORDINAL[sev]))
    try:
        res = spearman(xs, ys)
        return res.statistic, res.p_value
    except (ConstantInput, TooFewPairs) as exc:
        findings.append(f"{label}: severity rho undefined ({exc})")
        return None, None


def _aetiology_eps2(
    composites: dict[str, float], meta_of: dict, label: str, findings: list[str]
) -> tuple[float | None, float | None]:
    by_group: dict[str, list[float]] = {}
    for spk, value in composites.items():
        aet = meta_of[spk].aetiology
        if aet in MAIN_GROUPS:
            by_group.setdefault(aet, []).append(value)
    data = [by_group[g] for g in sorted(by_group)]
    if len(data) < 2:
        findings.append(f"{label}: < 2 aetiology groups, epsilon-squared undefined")
        return None, None
    try:
        res = kruskal_wallis(data)
    except (EmptyGroup, TooFewGroups) as exc:
        findings.append(f"{label}: {exc}")
        return None, None
    return res.extras["epsilon_squared"], float(res.n)


def fixed_token_dprime(
    corpus: Corpus,
    feature_configs: dict[str, FeatureConfig],
    *,
    budgets: tuple[int, ...] = (20, 50, 100, 200),
    n_repeats: int = 50,
    seed: int,
) -> AnalysisReport:
    """Severity and aetiology statistics at fixed per-class token budgets.

    For each budget, speakers with at least that many tokens in both classes
    of all five consonant contrasts are kept; d' is computed from exactly
    N tokens per class subsampled without replacement, averaged over
    *n_repeats* draws with per-(speaker, feature, repeat) RNG streams. The
    common-speaker-set variant restricts to speakers qualifying at every
    budget.
    """
    if any(b < 5 for b in budgets):
        raise AnalysisError(f"budgets must be >= 5, got {budgets}")
    if n_repeats < 1:
        raise AnalysisError("n_repeats must be >= 1")
    report = AnalysisReport(
        analysis_id="fixed_token_dprime",
        parameters={"budgets": list(budgets), "n_repeats": n_repeats},
        seed=seed,
    )

    directions = {}
    for language in corpus.languages():
        fc = feature_configs.get(language)
        if fc is None:
            report.findings.append(f"no feature config for language {language}")
            continue
        try:
            directions[language] = estimate_directions(corpus, language, fc)
        except NoHealthyControls:
            report.findings.append(f"{language}: no HC baseline, speakers skipped")

    meta_of = {s.speaker_id: s for s in corpus.manifest.speakers}
    projections: dict[str, dict[str, tuple[np.ndarray, np.ndarray]]] = {}
    for meta in corpus.manifest.speakers:
        ds = directions.get(meta.language)
        fc = feature_configs.get(meta.language)
        if ds is None or fc is None:
            continue
        labels, rows = corpus.phone_labels_and_rows(meta.speaker_id)
        if not labels:
            continue
        emb = corpus.embeddings[rows]
        per_feature: dict[str, tuple[np.ndarray, np.ndarray]] = {}
        for feature in CONSONANT5:
            klass = fc.features[feature]
            w = ds.directions[feature]
            pos_idx = [i for i, lab in enumerate(labels) if lab in klass.pos]
            neg_idx = [i for i, lab in enumerate(labels) if lab in klass.neg]
            per_feature[feature] = (emb[pos_idx] @ w, emb[neg_idx] @ w)
        projections[meta.speaker_id] = per_feature

    def qualifies(spk: str, budget: int) -> bool:
        return all(
            min(len(pos), len(neg)) >= budget
            for pos, neg in projections[spk].values()
        )

    qualifying = {
        budget: sorted(s for s in projections if qualifies(s, budget))
        for budget in budgets
    }
    for budget, speakers in qualifying.items():
        if not speakers:
            raise NoQualifyingSpeakers(f"no speaker has >= {budget} tokens per class")
    common = sorted(set.intersection(*(set(v) for v in qualifying.values())))

    def subsampled_dprime(spk: str, feature_idx: int, feature: str, budget: int) -> float | None:
        pos, neg = projections[spk][feature]
        key = _speaker_stream_key(spk)
        values = []
        for repeat in range(n_repeats):
            rng = np.random.default_rng([seed, key, feature_idx, repeat, budget])
            ps = pos[rng.choice(len(pos), size=budget, replace=False)]
            ns = neg[rng.choice(len(neg), size=budget, replace=False)]
            mean_diff = ps.mean() - ns.mean()
            pooled = np.sqrt((ps.var(ddof=1) + ns.var(ddof=1)) / 2.0)
            if pooled < 1e-12:
                continue
            values.append(mean_diff / pooled)
        return float(np.mean(values)) if values else None

    def composites_for(speakers: list[str], budget: int) -> dict[str, float]:
        out = {}
        for spk in speakers:
            feats = []
            for fi, feature in enumerate(CONSONANT5):
                d = subsampled_dprime(spk, fi, feature, budget)
                if d is None:
                    break
                feats.append(d)
            else:
                out[spk] = float(np.mean(feats))
        return out

    grid: dict[tuple[str, str], float | None] = {}
    common_grid: dict[tuple[str, str], float | None] = {}
    speaker_grid: dict[tuple[str, str], float | None] = {}
    budget_labels = [str(b) for b in budgets]
    for budget in budgets:
        label = str(budget)
        comp = composites_for(qualifying[budget], budget)
        for spk, value in comp.items():
            speaker_grid[(spk, label)] = value
        grid[(label, "n")] = float(len(comp))
        rho, p = _severity_stats(comp, meta_of, f"budget {budget}", report.findings)
        grid[(label, "severity_rho")] = rho
        grid[(label, "severity_p")] = p
        eps2, kw_n = _aetiology_eps2(comp, meta_of, f"budget {budget}", report.findings)
        grid[(label, "epsilon_squared")] = eps2
        grid[(label, "kw_n")] = kw_n

        comp_c = composites_for(common, budget)
        common_grid[(label, "n")] = float(len(comp_c))
        rho_c, p_c = _severity_stats(
            comp_c, meta_of, f"common set, budget {budget}", report.findings
        )
        common_grid[(label, "severity_rho")] = rho_c
        common_grid[(label, "severity_p")] = p_c
        eps2_c, kw_n_c = _aetiology_eps2(
            comp_c, meta_of, f"common set, budget {budget}", report.findings
        )
        common_grid[(label, "epsilon_squared")] = eps2_c
        common_grid[(label, "kw_n")] = kw_n_c

    cols = ["n", "severity_rho", "severity_p", "epsilon_squared", "kw_n"]
    report.add_table("per_budget", Grid.from_dict(budget_labels, cols, grid))
    report.add_table("per_budget_common", Grid.from_dict(budget_labels, cols, common_grid))
    all_speakers = sorted({spk for spk, _ in speaker_grid})
    report.add_table(
        "composite_by_speaker", Grid.from_dict(all_speakers, budget_labels, speaker_grid)
    )
    report.findings.append(f"common speaker set size: {len(common)}")
    return report
