"""Aetiology discrimination: Kruskal-Wallis grid, pairwise effects, HC deviation."""

from __future__ import annotations

from itertools import combinations

from ..corpus import MAIN_GROUPS
from ..errors import DegeneratePooledSD, EmptyGroup, GroupTooSmall, TooFewGroups
from ..profiles import COMPOSITE, FULL15
from ..report import AnalysisReport, Grid
from ..stats import cohens_d, holm_adjust, kruskal_wallis, mann_whitney
from ..table import ProfileTable

MIN_DEVIATION_CELL = 5  # speakers with valid values needed per deviation-grid cell


def aetiology_discrimination(
    table: ProfileTable,
    *,
    groups: tuple[str, ...] = MAIN_GROUPS,
    severity: str | None = None,
    seed: int = 0,
) -> AnalysisReport:
    """Compare aetiology groups on every feature and on the composite.

    Emits a per-feature Kruskal-Wallis grid (pairwise deletion, so N varies
    per feature), pairwise Cohen's d / Holm-adjusted Mann-Whitney p /
    rank-biserial matrices on the composite, and the per-feature
    deviation-from-HC Cohen's d grid. ``severity`` restricts rows to one
    severity level. Aetiologies not in *groups* are ignored.
    """
    report = AnalysisReport(
        analysis_id="aetiology_discrimination",
        parameters={"groups": list(groups), "severity": severity},
        seed=seed,
    )
    rows = [r for r in table.rows if r.meta.aetiology in groups]
    if severity is not None:
        rows = [r for r in rows if r.meta.severity == severity]

    present = [g for g in groups if any(r.meta.aetiology == g for r in rows)]
    absent = [g for g in groups if g not in present]
    if absent:
        report.findings.append(f"groups with no rows dropped: {absent}")

    kw_grid: dict[tuple[str, str], float | None] = {}
    for feature in FULL15 + (COMPOSITE,):
        per_group = [
            [v for r in rows if r.meta.aetiology == g and (v := r.get(feature)) is not None]
            for g in present
        ]
        nonempty = [g for g, vals in zip(present, per_group) if vals]
        data = [vals for vals in per_group if vals]
        if len(data) < 2 or sum(len(d) for d in data) < len(data) + 1:
            report.findings.append(f"{feature}: too little data for Kruskal-Wallis")
            continue
        try:
            res = kruskal_wallis(data)
        except (EmptyGroup, TooFewGroups) as exc:
            report.findings.append(f"{feature}: {exc}")
            continue
        kw_grid[(feature, "H")] = res.statistic
        kw_grid[(feature, "p")] = res.p_value
        kw_grid[(feature, "epsilon_squared")] = res.extras["epsilon_squared"]
        kw_grid[(feature, "N")] = float(res.n)
        kw_grid[(feature, "k")] = float(len(nonempty))
    kw_rows = [f for f in FULL15 + (COMPOSITE,) if (f, "H") in kw_grid]
    report.add_table(
        "kruskal_wallis",
        Grid.from_dict(kw_rows, ["H", "p", "epsilon_squared", "N", "k"], kw_grid),
    )

    composite_by_group = {
        g: [v for r in rows if r.meta.aetiology == g and (v := r.get(COMPOSITE)) is not None]
        for g in present
    }
    small = [g for g, vals in composite_by_group.items() if len(vals) < 2]
    if small:
        raise GroupTooSmall(
            f"groups with < 2 speakers holding {COMPOSITE}: {small}"
        )

    d_grid: dict[tuple[str, str], float | None] = {}
    p_raw: list[float] = []
    pair_list = list(combinations(present, 2))
    rb_grid: dict[tuple[str, str], float | None] = {}
    for a, b in pair_list:
        try:
            d = cohens_d(composite_by_group[a], composite_by_group[b])
        except DegeneratePooledSD:
            d = None
            report.findings.append(f"{a} vs {b}: degenerate pooled SD")
        d_grid[(a, b)] = d
        d_grid[(b, a)] = None if d is None else -d
        mw = mann_whitney(composite_by_group[a], composite_by_group[b])
        p_raw.append(mw.p_value)
        rb_grid[(a, b)] = mw.extras["rank_biserial"]
        rb_grid[(b, a)] = -mw.extras["rank_biserial"]
    report.add_table("pairwise_cohens_d", Grid.from_dict(list(present), list(present), d_grid))
    report.add_table(
        "pairwise_rank_biserial", Grid.from_dict(list(present), list(present), rb_grid)
    )

    adjusted = holm_adjust(p_raw)
    p_grid: dict[tuple[str, str], float | None] = {}
    for (a, b), raw, adj in zip(pair_list, p_raw, adjusted):
        p_grid[(a, b)] = adj
        p_grid[(b, a)] = raw
    report.add_table(
        "pairwise_p",
        Grid.from_dict(list(present), list(present), p_grid),
    )
    report.findings.append(
        "pairwise_p: upper triangle holds Holm-adjusted p, lower triangle raw p"
    )

    if "HC" in present:
        hc_rows = [r for r in rows if r.meta.aetiology == "HC"]
        dev_grid: dict[tuple[str, str], float | None] = {}
        others = [g for g in present if g != "HC"]
        for feature in FULL15 + (COMPOSITE,):
            hc_vals = [v for r in hc_rows if (v := r.get(feature)) is not None]
            for g in others:
                g_vals = [
                    v
                    for r in rows
                    if r.meta.aetiology == g and (v := r.get(feature)) is not None
                ]
                if len(hc_vals) < MIN_DEVIATION_CELL or len(g_vals) < MIN_DEVIATION_CELL:
                    dev_grid[(feature, g)] = None
                    continue
                try:
                    dev_grid[(feature, g)] = cohens_d(hc_vals, g_vals)
                except DegeneratePooledSD:
                    dev_grid[(feature, g)] = None
        report.add_table(
            "deviation_from_hc",
            Grid.from_dict(list(FULL15 + (COMPOSITE,)), others, dev_grid),
        )
    else:
        report.findings.append("HC not among groups: deviation grid skipped")

    return report
