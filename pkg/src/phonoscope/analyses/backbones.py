"""Agreement between embedding backbones on profiles and rankings."""

from __future__ import annotations

from itertools import combinations

import numpy as np

from ..corpus import MAIN_GROUPS
from ..errors import ConstantInput, NoSharedSpeakers, TooFewPairs
from ..profiles import COMPOSITE, CONSONANT5
from ..report import AnalysisReport, Grid
from ..stats import cosine, spearman
from ..table import ProfileTable
from .severity import SEVERITY_LEVELS


def _composite_map(table: ProfileTable) -> dict[str, float]:
    return {
        r.profile.speaker_id: v
        for r in table.rows
        if (v := r.get(COMPOSITE)) is not None
    }


def _aetiology_profile(table: ProfileTable, aetiology: str) -> np.ndarray | None:
    rows = [
        r
        for r in table.rows
        if r.meta.aetiology == aetiology
        and all(r.get(f) is not None for f in CONSONANT5)
    ]
    if not rows:
        return None
    mat = np.asarray([[r.get(f) for f in CONSONANT5] for r in rows], dtype=float)
    return mat.mean(axis=0)


def backbone_agreement(
    tables: dict[str, ProfileTable],
    *,
    reference: str | None = None,
    min_shared: int = 10,
    seed: int = 0,
) -> AnalysisReport:
    """Inter-backbone agreement on composite rankings and profile shapes.

    Reports pairwise Spearman rho on the per-speaker composite over shared
    speakers, per-aetiology consonant-profile cosine against a reference
    backbone, and a per-backbone severity-monotonicity verdict.
    """
    ids = sorted(tables)
    if len(ids) < 2:
        raise NoSharedSpeakers("need at least 2 backbones")
    if reference is None:
        reference = ids[0]
    if reference not in tables:
        raise KeyError(f"reference backbone {reference!r} not among tables")
    report = AnalysisReport(
        analysis_id="backbone_agreement",
        parameters={"reference": reference, "min_shared": min_shared},
        seed=seed,
    )

    composites = {bid: _composite_map(tables[bid]) for bid in ids}
    rho_grid: dict[tuple[str, str], float | None] = {}
    n_grid: dict[tuple[str, str], float | None] = {}
    any_pair = False
    for a, b in combinations(ids, 2):
        shared = sorted(set(composites[a]) & set(composites[b]))
        n_grid[(a, b)] = n_grid[(b, a)] = float(len(shared))
        if len(shared) < min_shared:
            report.findings.append(
                f"{a} vs {b}: only {len(shared)} shared speakers (< {min_shared})"
            )
            continue
        try:
            res = spearman(
                [composites[a][s] for s in shared], [composites[b][s] for s in shared]
            )
        except (ConstantInput, TooFewPairs) as exc:
            report.findings.append(f"{a} vs {b}: {exc}")
            continue
        rho_grid[(a, b)] = rho_grid[(b, a)] = res.statistic
        any_pair = True
    if not any_pair:
        raise NoSharedSpeakers(f"no backbone pair shares >= {min_shared} speakers")
    report.add_table("spearman_rho", Grid.from_dict(ids, ids, rho_grid))
    report.add_table("shared_n", Grid.from_dict(ids, ids, n_grid))

    cos_grid: dict[tuple[str, str], float | None] = {}
    groups = sorted({r.meta.aetiology for t in tables.values() for r in t.rows} & set(MAIN_GROUPS))
    ref_profiles = {g: _aetiology_profile(tables[reference], g) for g in groups}
    for bid in ids:
        for g in groups:
            ref_p = ref_profiles[g]
            own_p = _aetiology_profile(tables[bid], g)
            if ref_p is None or own_p is None:
                cos_grid[(bid, g)] = None
                continue
            cos_grid[(bid, g)] = cosine(own_p, ref_p)
    report.add_table("profile_cosine_vs_reference", Grid.from_dict(ids, groups, cos_grid))

    mono_grid: dict[tuple[str, str], float | None] = {}
    for bid in ids:
        table = tables[bid]
        means: list[float] = []
        for lvl in SEVERITY_LEVELS:
            vals = [
                v
                for r in table.rows
                if r.meta.severity == lvl and (v := r.get(COMPOSITE)) is not None
            ]
            if vals:
                means.append(float(np.mean(vals)))
        if len(means) < 2:
            mono_grid[(bid, "strictly_decreasing")] = None
            report.findings.append(f"{bid}: < 2 severity levels, monotonicity undefined")
            continue
        mono = all(a > b for a, b in zip(means, means[1:]))
        mono_grid[(bid, "strictly_decreasing")] = 1.0 if mono else 0.0
        mono_grid[(bid, "n_levels")] = float(len(means))
    report.add_table(
        "monotonicity", Grid.from_dict(ids, ["strictly_decreasing", "n_levels"], mono_grid)
    )
    return report
