"""Robustness checks: token matching, leave-one-dataset-out, residualization."""

from __future__ import annotations

from math import log

import numpy as np

from ..corpus import MAIN_GROUPS, SEVERITY_ORDINAL
from ..errors import (
    ConstantInput,
    DegeneratePooledSD,
    EmptyGroup,
    SingleDataset,
    TooFewGroups,
    TooFewPairs,
)
from ..profiles import COMPOSITE, FULL15
from ..report import AnalysisReport, Grid
from ..stats import cohens_d, kruskal_wallis, mann_whitney, residualize, spearman
from ..table import ProfileRow, ProfileTable
from .severity import SEVERITY_LEVELS

ADJACENT_PAIRS = (("control", "mild"), ("mild", "moderate"), ("moderate", "severe"))


def token_matched_comparison(
    table: ProfileTable, *, tolerance: float = 0.20, seed: int = 0
) -> AnalysisReport:
    """Compare adjacent severity levels on composites of token-matched pairs.

    Candidate pairs are sorted by |log token ratio| and matched greedily
    without reuse; a pair is admitted when the relative token-count
    difference max(r, 1/r) - 1 stays within the tolerance.
    """
    report = AnalysisReport(
        analysis_id="token_matched_comparison",
        parameters={"tolerance": tolerance},
        seed=seed,
    )
    usable = [
        r
        for r in table.rows
        if r.get(COMPOSITE) is not None
        and r.meta.severity in SEVERITY_ORDINAL
        and r.profile.n_phones > 0
    ]
    grid: dict[tuple[str, str], float | None] = {}
    pair_labels = []
    for level_a, level_b in ADJACENT_PAIRS:
        label = f"{level_a}_vs_{level_b}"
        pair_labels.append(label)
        side_a = [r for r in usable if r.meta.severity == level_a]
        side_b = [r for r in usable if r.meta.severity == level_b]
        candidates = []
        for i, ra in enumerate(side_a):
            for j, rb in enumerate(side_b):
                ratio = ra.profile.n_phones / rb.profile.n_phones
                if max(ratio, 1.0 / ratio) - 1.0 <= tolerance:
                    candidates.append(
                        (
                            abs(log(ratio)),
                            ra.profile.speaker_id,
                            rb.profile.speaker_id,
                            i,
                            j,
                        )
                    )
        candidates.sort()
        used_a: set[int] = set()
        used_b: set[int] = set()
        matched_a: list[float] = []
        matched_b: list[float] = []
        for _, _, _, i, j in candidates:
            if i in used_a or j in used_b:
                continue
            used_a.add(i)
            used_b.add(j)
            matched_a.append(side_a[i].get(COMPOSITE))
            matched_b.append(side_b[j].get(COMPOSITE))
        grid[(label, "n_pairs")] = float(len(matched_a))
        if len(matched_a) < 2:
            report.findings.append(f"{label}: {len(matched_a)} matched pair(s), stats skipped")
            continue
        try:
            grid[(label, "cohens_d")] = cohens_d(matched_a, matched_b)
        except DegeneratePooledSD:
            report.findings.append(f"{label}: degenerate pooled SD")
        mw = mann_whitney(matched_a, matched_b)
        grid[(label, "mw_p")] = mw.p_value
        grid[(label, "rank_biserial")] = mw.extras["rank_biserial"]
    report.add_table(
        "matched",
        Grid.from_dict(pair_labels, ["n_pairs", "cohens_d", "mw_p", "rank_biserial"], grid),
    )
    return report


def _severity_rho(rows: list[ProfileRow]) -> tuple[float | None, float | None]:
    xs = [
        v
        for r in rows
        if r.meta.severity in SEVERITY_ORDINAL and (v := r.get(COMPOSITE)) is not None
    ]
    ys = [
        float(SEVERITY_ORDINAL[r.meta.severity])
        for r in rows
        if r.meta.severity in SEVERITY_ORDINAL and r.get(COMPOSITE) is not None
    ]
    try:
        res = spearman(xs, ys)
        return res.statistic, res.p_value
    except (ConstantInput, TooFewPairs):
        return None, None


def _composite_eps2(rows: list[ProfileRow]) -> float | None:
    by_group: dict[str, list[float]] = {}
    for r in rows:
        if r.meta.aetiology in MAIN_GROUPS and (v := r.get(COMPOSITE)) is not None:
            by_group.setdefault(r.meta.aetiology, []).append(v)
    data = [by_group[g] for g in sorted(by_group)]
    if len(data) < 2:
        return None
    try:
        return kruskal_wallis(data).extras["epsilon_squared"]
    except (EmptyGroup, TooFewGroups):
        return None


def lodo_stability(table: ProfileTable, *, seed: int = 0) -> AnalysisReport:
    """Severity rho and composite epsilon-squared with each dataset held out."""
    datasets = table.datasets()
    if len(datasets) < 2:
        raise SingleDataset(f"need >= 2 datasets, got {datasets}")
    report = AnalysisReport(
        analysis_id="lodo_stability", parameters={"datasets": datasets}, seed=seed
    )
    grid: dict[tuple[str, str], float | None] = {}
    rhos, eps2s = [], []
    for held_out in datasets:
        rest = [r for r in table.rows if r.meta.dataset != held_out]
        grid[(held_out, "n_rows")] = float(len(rest))
        rho, p = _severity_rho(rest)
        eps2 = _composite_eps2(rest)
        grid[(held_out, "severity_rho")] = rho
        grid[(held_out, "severity_p")] = p
        grid[(held_out, "epsilon_squared")] = eps2
        if rho is None and eps2 is None:
            report.findings.append(f"fold {held_out}: insufficient data, skipped")
        if rho is not None:
            rhos.append(rho)
        if eps2 is not None:
            eps2s.append(eps2)
    report.add_table(
        "folds",
        Grid.from_dict(datasets, ["n_rows", "severity_rho", "severity_p", "epsilon_squared"], grid),
    )
    summary: dict[tuple[str, str], float | None] = {}
    for name, vals in (("severity_rho", rhos), ("epsilon_squared", eps2s)):
        if vals:
            summary[(name, "min")] = float(min(vals))
            summary[(name, "mean")] = float(np.mean(vals))
            summary[(name, "max")] = float(max(vals))
            summary[(name, "n_folds")] = float(len(vals))
    report.add_table(
        "summary",
        Grid.from_dict(["severity_rho", "epsilon_squared"], ["min", "mean", "max", "n_folds"], summary),
    )
    return report


def _ordering(
    rows: list[ProfileRow], values: dict[str, float], key
) -> tuple[str, ...]:
    """Group labels ordered by descending group mean."""
    groups: dict[str, list[float]] = {}
    for r in rows:
        v = values.get(r.profile.speaker_id)
        if v is None:
            continue
        label = key(r)
        if label is None:
            continue
        groups.setdefault(label, []).append(v)
    usable = {g: np.mean(v) for g, v in groups.items() if len(v) >= 2}
    return tuple(sorted(usable, key=lambda g: (-usable[g], g)))


def residualized_rankings(table: ProfileTable, *, seed: int = 0) -> AnalysisReport:
    """Regress each feature on log(n_phones) and compare group orderings.

    For every feature, the aetiology-mean and severity-mean orderings are
    computed on raw values and on residuals; the report records whether each
    ordering is preserved, plus the group means themselves.
    """
    report = AnalysisReport(analysis_id="residualized_rankings", parameters={}, seed=seed)
    verdicts: dict[tuple[str, str], float | None] = {}
    raw_means: dict[tuple[str, str], float | None] = {}
    res_means: dict[tuple[str, str], float | None] = {}
    sev_raw_means: dict[tuple[str, str], float | None] = {}
    sev_res_means: dict[tuple[str, str], float | None] = {}
    groups_present = [g for g in MAIN_GROUPS if any(r.meta.aetiology == g for r in table.rows)]
    levels_present = [
        lvl for lvl in SEVERITY_LEVELS if any(r.meta.severity == lvl for r in table.rows)
    ]

    for feature in FULL15 + (COMPOSITE,):
        rows = [
            r
            for r in table.rows
            if r.get(feature) is not None and r.profile.n_phones >= 1
        ]
        if len(rows) < 3:
            report.findings.append(f"{feature}: < 3 usable rows, skipped")
            continue
        y = np.asarray([r.get(feature) for r in rows], dtype=float)
        x = np.asarray([log(r.profile.n_phones) for r in rows], dtype=float)
        resid = residualize(y, x)
        raw_values = {r.profile.speaker_id: float(v) for r, v in zip(rows, y)}
        res_values = {r.profile.speaker_id: float(v) for r, v in zip(rows, resid)}

        def aet_key(r: ProfileRow):
            return r.meta.aetiology if r.meta.aetiology in MAIN_GROUPS else None

        def sev_key(r: ProfileRow):
            return r.meta.severity if r.meta.severity in SEVERITY_ORDINAL else None

        aet_raw = _ordering(rows, raw_values, aet_key)
        aet_res = _ordering(rows, res_values, aet_key)
        sev_raw = _ordering(rows, raw_values, sev_key)
        sev_res = _ordering(rows, res_values, sev_key)
        verdicts[(feature, "n")] = float(len(rows))
        verdicts[(feature, "aetiology_order_preserved")] = (
            1.0 if aet_raw == aet_res else 0.0 if aet_raw and aet_res else None
        )
        verdicts[(feature, "severity_order_preserved")] = (
            1.0 if sev_raw == sev_res else 0.0 if sev_raw and sev_res else None
        )
        if aet_raw != aet_res:
            report.findings.append(
                f"{feature}: aetiology ordering changed {list(aet_raw)} -> {list(aet_res)}"
            )
        if sev_raw != sev_res:
            report.findings.append(
                f"{feature}: severity ordering changed {list(sev_raw)} -> {list(sev_res)}"
            )
        for g in groups_present:
            vals_raw = [raw_values[r.profile.speaker_id] for r in rows if r.meta.aetiology == g]
            vals_res = [res_values[r.profile.speaker_id] for r in rows if r.meta.aetiology == g]
            raw_means[(feature, g)] = float(np.mean(vals_raw)) if len(vals_raw) >= 2 else None
            res_means[(feature, g)] = float(np.mean(vals_res)) if len(vals_res) >= 2 else None
        for lvl in levels_present:
            vals_raw = [raw_values[r.profile.speaker_id] for r in rows if r.meta.severity == lvl]
            vals_res = [res_values[r.profile.speaker_id] for r in rows if r.meta.severity == lvl]
            sev_raw_means[(feature, lvl)] = (
                float(np.mean(vals_raw)) if len(vals_raw) >= 2 else None
            )
            sev_res_means[(feature, lvl)] = (
                float(np.mean(vals_res)) if len(vals_res) >= 2 else None
            )

    features = [f for f in FULL15 + (COMPOSITE,) if (f, "n") in verdicts]
    report.add_table(
        "verdicts",
        Grid.from_dict(
            features, ["n", "aetiology_order_preserved", "severity_order_preserved"], verdicts
        ),
    )
    report.add_table("aetiology_means_raw", Grid.from_dict(features, groups_present, raw_means))
    report.add_table(
        "aetiology_means_residualized", Grid.from_dict(features, groups_present, res_means)
    )
    report.add_table("severity_means_raw", Grid.from_dict(features, levels_present, sev_raw_means))
    report.add_table(
        "severity_means_residualized", Grid.from_dict(features, levels_present, sev_res_means)
    )
    return report
