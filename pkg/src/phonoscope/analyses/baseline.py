"""Ridge-regression comparison against an ingested confidence scalar."""

from __future__ import annotations

import numpy as np

from ..corpus import SEVERITY_ORDINAL
from ..errors import (
    ConstantInput,
    InsufficientData,
    MissingBaselineColumn,
    TooFewPairs,
)
from ..profiles import MAIN13
from ..report import AnalysisReport, Grid
from ..stats import ridge_cv, spearman
from ..table import ProfileTable


def baseline_comparison(
    table: ProfileTable,
    *,
    k_folds: int = 10,
    lam: float = 1.0,
    min_rows: int = 50,
    seed: int,
) -> AnalysisReport:
    """Severity prediction with and without the confidence scalar.

    Runs k-fold ridge regression on the 13 main features, on the 13 features
    plus the per-speaker confidence scalar, and on the scalar alone
    (complete-case rows with known severity). Also reports the scalar's
    Spearman correlation with each feature.
    """
    if not any(r.meta.ctc_conf is not None for r in table.rows):
        raise MissingBaselineColumn("no speaker carries a confidence scalar")
    rows = [
        r
        for r in table.rows
        if r.meta.ctc_conf is not None
        and r.meta.severity in SEVERITY_ORDINAL
        and all(r.get(f) is not None for f in MAIN13)
    ]
    if len(rows) < min_rows:
        raise InsufficientData(
            f"need >= {min_rows} complete-case rows with the scalar, got {len(rows)}"
        )
    report = AnalysisReport(
        analysis_id="baseline_comparison",
        parameters={"k_folds": k_folds, "lambda": lam, "n_rows": len(rows)},
        seed=seed,
    )

    X13 = np.asarray([[r.get(f) for f in MAIN13] for r in rows], dtype=float)
    ctc = np.asarray([r.meta.ctc_conf for r in rows], dtype=float)
    y = np.asarray([SEVERITY_ORDINAL[r.meta.severity] for r in rows], dtype=float)

    designs = {
        "main13": X13,
        "main13_plus_ctc": np.column_stack([X13, ctc]),
        "ctc_only": ctc[:, None],
    }
    grid: dict[tuple[str, str], float | None] = {}
    for name, X in designs.items():
        try:
            rmse, rho = ridge_cv(X, y, k_folds=min(k_folds, len(rows)), lam=lam, seed=seed)
            grid[(name, "rmse")] = rmse
            grid[(name, "spearman_rho")] = rho
        except (ConstantInput, TooFewPairs) as exc:
            report.findings.append(f"{name}: prediction correlation undefined ({exc})")
        grid[(name, "n")] = float(len(rows))
        grid[(name, "k_folds")] = float(min(k_folds, len(rows)))
    report.add_table(
        "ridge", Grid.from_dict(list(designs), ["rmse", "spearman_rho", "n", "k_folds"], grid)
    )

    corr: dict[tuple[str, str], float | None] = {}
    for feature in MAIN13:
        vals = [r.get(feature) for r in rows]
        try:
            res = spearman(ctc, vals)
            corr[(feature, "rho")] = res.statistic
            corr[(feature, "p")] = res.p_value
            corr[(feature, "n")] = float(res.n)
        except (ConstantInput, TooFewPairs) as exc:
            report.findings.append(f"{feature}: correlation with scalar undefined ({exc})")
    report.add_table(
        "ctc_feature_correlation", Grid.from_dict(list(MAIN13), ["rho", "p", "n"], corr)
    )
    return report
