"""Severity mapping and the severity-gradient analysis."""

from __future__ import annotations

import numpy as np

from ..corpus import SEVERITY_ORDINAL
from ..errors import (
    ConstantInput,
    InsufficientSeverityLevels,
    OutOfRange,
    TooFewPairs,
)
from ..report import AnalysisReport, Grid
from ..stats import bootstrap_ci, spearman
from ..table import ProfileTable

SEVERITY_LEVELS = ("control", "mild", "moderate", "severe")


def stipancic_map(intelligibility_pct: float) -> str:
    """Map an intelligibility percentage to a severity category.

    control > 94; mild 85-94; moderate 70-84 (exclusive of 85); severe < 70.
    """
    if not (0.0 <= intelligibility_pct <= 100.0):
        raise OutOfRange(f"intelligibility {intelligibility_pct} outside [0, 100]")
    if intelligibility_pct > 94.0:
        return "control"
    if intelligibility_pct >= 85.0:
        return "mild"
    if intelligibility_pct >= 70.0:
        return "moderate"
    return "severe"


def token_quartile_labels(n_phones: np.ndarray) -> np.ndarray:
    """Assign each row a token-count quartile label 0..3."""
    qs = np.quantile(n_phones, [0.25, 0.5, 0.75])
    return np.searchsorted(qs, n_phones, side="left")


def severity_gradient(
    table: ProfileTable,
    *,
    feature: str = "composite_consonant_dprime",
    stratify_by_tokens: bool = True,
    severity_source: str | None = None,
    n_boot: int = 1000,
    seed: int,
) -> AnalysisReport:
    """Per-severity means, monotonicity verdict and severity correlation.

    Severity is coded control=0, mild=1, moderate=2, severe=3; unknowns are
    excluded. ``severity_source`` restricts rows to one label provenance
    (e.g. "clinical" for the label-source ablation). The Spearman CI uses a
    bootstrap over speakers, stratified by token-count quartile when
    requested. A per-quartile rho breakdown is included.
    """
    report = AnalysisReport(
        analysis_id="severity_gradient",
        parameters={
            "feature": feature,
            "stratify_by_tokens": stratify_by_tokens,
            "severity_source": severity_source,
            "n_boot": n_boot,
        },
        seed=seed,
    )
    usable = [
        r
        for r in table.rows
        if r.meta.severity in SEVERITY_ORDINAL and r.get(feature) is not None
    ]
    if severity_source is not None:
        usable = [r for r in usable if r.meta.severity_source == severity_source]
    levels = [
        lvl
        for lvl in SEVERITY_LEVELS
        if sum(1 for r in usable if r.meta.severity == lvl) > 0
    ]
    big_enough = [
        lvl for lvl in levels if sum(1 for r in usable if r.meta.severity == lvl) >= 3
    ]
    if len(big_enough) < 2:
        raise InsufficientSeverityLevels(
            f"need >= 2 severity levels with >= 3 speakers, got {len(big_enough)}"
        )

    values = np.asarray([r.get(feature) for r in usable], dtype=float)
    ordinals = np.asarray([SEVERITY_ORDINAL[r.meta.severity] for r in usable], dtype=float)
    n_phones = np.asarray([r.profile.n_phones for r in usable], dtype=float)

    means_grid: dict[tuple[str, str], float | None] = {}
    means_in_order: list[float] = []
    for lvl in levels:
        idx = [i for i, r in enumerate(usable) if r.meta.severity == lvl]
        vals = values[idx]
        means_grid[(lvl, "n")] = float(len(vals))
        mean = float(vals.mean())
        means_grid[(lvl, "mean")] = mean
        means_in_order.append(mean)
        if len(vals) >= 3:
            ci = bootstrap_ci(
                vals.tolist(), lambda s: float(np.mean(s)), n_resamples=n_boot,
                seed=seed + SEVERITY_ORDINAL[lvl] + 1,
            )
            means_grid[(lvl, "ci_lower")] = ci.lower
            means_grid[(lvl, "ci_upper")] = ci.upper
    report.add_table(
        "severity_means",
        Grid.from_dict(list(levels), ["n", "mean", "ci_lower", "ci_upper"], means_grid),
    )

    monotone = all(a > b for a, b in zip(means_in_order, means_in_order[1:]))
    report.add_table(
        "monotonicity",
        Grid(rows=["strictly_decreasing"], cols=["verdict"], values=[[1.0 if monotone else 0.0]]),
    )
    report.findings.append(
        f"severity means {'are' if monotone else 'are NOT'} strictly decreasing over {levels}"
    )

    corr_grid: dict[tuple[str, str], float | None] = {}
    try:
        res = spearman(values, ordinals)
        corr_grid[("spearman", "rho")] = res.statistic
        corr_grid[("spearman", "p")] = res.p_value
        corr_grid[("spearman", "n")] = float(res.n)

        pairs = list(zip(values.tolist(), ordinals.tolist()))
        strata = token_quartile_labels(n_phones) if stratify_by_tokens else None

        def stat(sample: list[tuple[float, float]]) -> float:
            xs = [p[0] for p in sample]
            ys = [p[1] for p in sample]
            return spearman(xs, ys).statistic

        ci = bootstrap_ci(pairs, stat, n_resamples=n_boot, seed=seed, strata=strata)
        corr_grid[("spearman", "ci_lower")] = ci.lower
        corr_grid[("spearman", "ci_upper")] = ci.upper
    except ConstantInput:
        report.findings.append("constant input: severity correlation undefined")
    report.add_table(
        "correlation",
        Grid.from_dict(["spearman"], ["rho", "p", "n", "ci_lower", "ci_upper"], corr_grid),
    )

    quartiles = token_quartile_labels(n_phones)
    q_grid: dict[tuple[str, str], float | None] = {}
    q_labels = []
    for q in range(4):
        idx = quartiles == q
        lo = float(n_phones[idx].min()) if idx.any() else float("nan")
        hi = float(n_phones[idx].max()) if idx.any() else float("nan")
        label = f"Q{q + 1}"
        q_labels.append(label)
        q_grid[(label, "n")] = float(idx.sum())
        q_grid[(label, "tokens_min")] = lo if idx.any() else None
        q_grid[(label, "tokens_max")] = hi if idx.any() else None
        try:
            res = spearman(values[idx], ordinals[idx])
            q_grid[(label, "rho")] = res.statistic
            q_grid[(label, "p")] = res.p_value
        except (ConstantInput, TooFewPairs):
            report.findings.append(f"{label}: quartile rho undefined")
    report.add_table(
        "quartile_rho",
        Grid.from_dict(q_labels, ["n", "tokens_min", "tokens_max", "rho", "p"], q_grid),
    )
    return report
