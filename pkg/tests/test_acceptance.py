"""Acceptance suite: one test per gate criterion, one printed line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the PASS/FAIL line
per criterion. Two checks encode reference values that are internally
inconsistent (the six-group effect-size grid's manner row, and Holm
idempotence); they are asserted exactly as specified and fail honestly.
"""

import itertools
import math
import time

import numpy as np
import pytest
from scipy import stats as scipy_stats

from conftest import consonant_row
from phonoscope.analyses import (
    centroid_classifier_lodo,
    crosslingual_consistency,
    fixed_token_dprime,
    residualized_rankings,
    severity_gradient,
)
from phonoscope.corpus import read_corpus, write_corpus
from phonoscope.errors import TextGridError
from phonoscope.feature_config import DPRIME_FEATURES
from phonoscope.profiles import dprime, estimate_directions
from phonoscope.stats import (
    epsilon_squared,
    holm_adjust,
    kruskal_wallis,
    mann_whitney,
    residualize,
    spearman,
)
from phonoscope.synth import SynthSpec, generate_corpus, make_feature_config
from phonoscope.table import ProfileTable, assemble_profiles
from phonoscope.textgrid import parse_textgrid
from test_textgrid import MINIMAL

CONSONANTS = ("nasality", "voicing", "sonorance", "stridency", "manner")
VOWELS = ("height", "lowness", "backness", "rounding")

COLLAPSE_TEMPLATES = {
    "HC": {f: 1.0 for f in DPRIME_FEATURES},
    "PD": {
        "nasality": 0.9, "voicing": 0.85, "sonorance": 0.9, "stridency": 0.7,
        "manner": 0.65, "height": 0.75, "lowness": 0.8, "backness": 0.8, "rounding": 0.75,
    },
}
MULTIPLIERS = {"control": 1.0, "mild": 0.8, "moderate": 0.6, "severe": 0.4}

# Reference effect-size grid for the six-group comparison:
# feature -> (H, N, published epsilon-squared), k = 6 groups.
REFERENCE_SIX_GROUP_GRID = {
    "height": (1380.4, 2768, 0.498),
    "rounding": (1171.6, 2639, 0.443),
    "stridency": (1150.4, 2867, 0.400),
    "backness": (1079.6, 2760, 0.390),
    "nasality": (1076.2, 2791, 0.385),
    "voicing": (1150.1, 2953, 0.385),
    "vowel_triangle_area": (395.6, 1157, 0.340),
    "lowness": (961.8, 2775, 0.346),
    "manner": (1031.1, 2974, 0.352),
    "sonorance": (591.7, 2943, 0.200),
    "cross_position_cos": (164.2, 2974, 0.055),
    "boundary_sharpness": (161.0, 2974, 0.054),
    "speech_rate": (149.7, 2739, 0.053),
    "vowel_duration_cv": (278.6, 2607, 0.105),
    "pause_rate": (64.6, 2739, 0.022),
}


def line(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[ACCEPTANCE] {name}: {status}{suffix}")


# ------------------------------------------------- 1. formula oracle grid


def test_criterion_formula_oracle_effect_size_grid():
    t0 = time.time()
    failures = []
    for feature, (h, n, published) in REFERENCE_SIX_GROUP_GRID.items():
        computed = epsilon_squared(h, 6, n)
        if abs(computed - published) > 0.005:
            failures.append(f"{feature}: computed {computed:.4f} vs published {published}")
    elapsed = time.time() - t0
    ok = not failures and elapsed < 1.0
    line("formula_oracle_effect_size_grid", ok, "; ".join(failures))
    assert elapsed < 1.0
    assert not failures, failures


# ------------------------------------------------- 2. d' estimator consistency


def test_criterion_dprime_estimator_consistency():
    t0 = time.time()
    rng = np.random.default_rng(424242)
    failures = []
    for true_d in (0.5, 1.0, 2.0, 3.0):
        for n in (20, 100, 1000):
            estimates = [
                dprime(rng.normal(true_d, 1, n), rng.normal(0, 1, n)) for _ in range(50)
            ]
            se = float(np.std(estimates, ddof=1)) / math.sqrt(50)
            err = abs(float(np.mean(estimates)) - true_d)
            if err >= 3 * se:
                failures.append(f"d'={true_d}, n={n}: |bias|={err:.3f} vs 3se={3 * se:.3f}")
    elapsed = time.time() - t0
    ok = not failures and elapsed < 30.0
    line("dprime_estimator_consistency", ok, f"{elapsed:.1f}s")
    assert elapsed < 30.0
    assert not failures, failures


# ------------------------------------------------- 3. end-to-end monotonicity


def test_criterion_end_to_end_monotonicity():
    t0 = time.time()
    spec = SynthSpec(
        languages=("en",),
        datasets=("synthA",),
        speakers_per_cell=50,
        seed=100,
        aetiology_templates=COLLAPSE_TEMPLATES,
        severity_multipliers=MULTIPLIERS,
    )
    corpus, _ = generate_corpus(spec)
    fc = make_feature_config("en")
    directions = {"en": estimate_directions(corpus, "en", fc)}
    table = assemble_profiles(corpus, directions, {"en": fc})
    report = severity_gradient(table, n_boot=1000, seed=100)

    counts = [report.tables["severity_means"].get(lvl, "n") for lvl in report.tables["severity_means"].rows]
    monotone = report.tables["monotonicity"].get("strictly_decreasing", "verdict") == 1.0
    rho = report.tables["correlation"].get("spearman", "rho")
    ci_upper = report.tables["correlation"].get("spearman", "ci_upper")
    elapsed = time.time() - t0
    ok = monotone and rho <= -0.5 and ci_upper < 0.0 and elapsed < 120.0
    line(
        "end_to_end_monotonicity",
        ok,
        f"rho={rho:.3f}, ci_upper={ci_upper:.3f}, {elapsed:.1f}s",
    )
    assert all(c >= 50 for c in counts)
    assert monotone
    assert rho <= -0.5
    assert ci_upper < 0.0
    assert elapsed < 120.0


# ------------------------------------------------- 4. fixed-token stability


def test_criterion_fixed_token_stability():
    budgets = (20, 50, 100, 200)
    spec = SynthSpec(
        languages=("en",),
        datasets=("synthA",),
        speakers_per_cell=5,
        seed=200,
        token_count_log_mean=8.46,
        token_count_min=4400,
        token_count_max=9000,
        severity_jitter=0.1,
        aetiology_templates=COLLAPSE_TEMPLATES,
        severity_multipliers=MULTIPLIERS,
    )
    corpus, _ = generate_corpus(spec)
    report = fixed_token_dprime(
        corpus, {"en": make_feature_config("en")}, budgets=budgets, n_repeats=25, seed=200
    )
    grid = report.tables["per_budget_common"]
    rhos = [grid.get(str(b), "severity_rho") for b in budgets]
    n_common = grid.get(str(budgets[0]), "n")
    spread = max(rhos) - min(rhos)
    ok = n_common > 0 and spread < 0.05
    line(
        "fixed_token_stability",
        ok,
        f"common n={n_common:.0f}, rhos={['%.3f' % r for r in rhos]}, spread={spread:.4f}",
    )
    assert n_common > 0
    assert spread < 0.05


# ------------------------------------------------- 5. kernel oracle equivalence


def oracle_ranks(values):
    values = list(values)
    return np.asarray(
        [
            1.0
            + sum(1 for w in values if w < v)
            + sum(1 for j, w in enumerate(values) if w == v and j != i) / 2.0
            for i, v in enumerate(values)
        ]
    )


def oracle_mw(a, b):
    u = sum(1.0 if x > y else 0.5 if x == y else 0.0 for x in a for y in b)
    pooled = list(a) + list(b)
    ranks = oracle_ranks(pooled)
    n_a = len(a)
    mu = n_a * len(b) / 2.0
    hits = total = 0
    for subset in itertools.combinations(range(len(pooled)), n_a):
        u_i = ranks[list(subset)].sum() - n_a * (n_a + 1) / 2.0
        total += 1
        if abs(u_i - mu) >= abs(u - mu) - 1e-9:
            hits += 1
    return u, hits / total


def oracle_spearman(x, y):
    rx, ry = oracle_ranks(x), oracle_ranks(y)
    rx = rx - rx.mean()
    ry = ry - ry.mean()
    return float(rx @ ry) / math.sqrt(float(rx @ rx) * float(ry @ ry))


def oracle_kruskal(groups):
    pooled = [v for g in groups for v in g]
    ranks = oracle_ranks(pooled)
    n = len(pooled)
    h, offset = 0.0, 0
    for g in groups:
        r = ranks[offset : offset + len(g)].sum()
        h += r * r / len(g)
        offset += len(g)
    h = 12.0 / (n * (n + 1)) * h - 3 * (n + 1)
    ties = sum(t**3 - t for t in (pooled.count(v) for v in set(pooled)))
    corr = 1.0 - ties / (n**3 - n)
    return 0.0 if corr <= 0 else h / corr


def test_criterion_kernel_oracle_equivalence():
    rng = np.random.default_rng(31337)
    worst = {"mw_u": 0.0, "mw_p": 0.0, "spearman": 0.0, "kruskal": 0.0}
    for i in range(1000):
        n_a = int(rng.integers(2, 9))
        n_b = int(rng.integers(2, 9))
        a = rng.integers(0, 6, n_a).astype(float)
        b = rng.integers(0, 6, n_b).astype(float)

        res = mann_whitney(a, b)
        u_ref, p_ref = oracle_mw(a, b)
        worst["mw_u"] = max(worst["mw_u"], abs(res.statistic - u_ref))
        if n_a + n_b <= 12:
            worst["mw_p"] = max(worst["mw_p"], abs(res.p_value - p_ref))

        n = int(rng.integers(3, 9))
        x = rng.integers(0, 6, n).astype(float)
        y = rng.integers(0, 6, n).astype(float)
        if not (np.all(x == x[0]) or np.all(y == y[0])):
            rho_ref = oracle_spearman(x, y)
            worst["spearman"] = max(
                worst["spearman"], abs(spearman(x, y).statistic - rho_ref)
            )

        k = int(rng.integers(2, 5))
        groups = [rng.integers(0, 6, int(rng.integers(2, 9))).astype(float) for _ in range(k)]
        pooled = np.concatenate(groups)
        if not np.all(pooled == pooled[0]):
            h_ref = oracle_kruskal([g.tolist() for g in groups])
            worst["kruskal"] = max(
                worst["kruskal"], abs(kruskal_wallis(groups).statistic - h_ref)
            )

    ok = (
        worst["mw_u"] < 1e-10
        and worst["mw_p"] < 1e-12
        and worst["spearman"] < 1e-10
        and worst["kruskal"] < 1e-10
    )
    line("kernel_oracle_equivalence", ok, str({k: f"{v:.1e}" for k, v in worst.items()}))
    assert worst["mw_u"] < 1e-10
    assert worst["mw_p"] < 1e-12
    assert worst["spearman"] < 1e-10
    assert worst["kruskal"] < 1e-10


# ------------------------------------------------- 6. Holm properties


def test_criterion_holm_properties():
    failures = []
    if holm_adjust([0.01, 0.02, 0.04]) != pytest.approx([0.03, 0.04, 0.04], abs=1e-12):
        failures.append("hand example")
    rng = np.random.default_rng(8)
    idempotence_broken = None
    for _ in range(200):
        ps = rng.uniform(0, 1, size=int(rng.integers(1, 10))).tolist()
        out = holm_adjust(ps)
        if not all(q >= p for p, q in zip(ps, out)):
            failures.append("adjusted below raw")
        if not all(0 <= q <= 1 for q in out):
            failures.append("outside [0,1]")
        order = sorted(range(len(ps)), key=lambda i: ps[i])
        sorted_adj = [out[i] for i in order]
        if not all(x <= y + 1e-15 for x, y in zip(sorted_adj, sorted_adj[1:])):
            failures.append("not monotone")
        readjusted = holm_adjust(out)
        if idempotence_broken is None and not np.allclose(readjusted, out, atol=1e-12):
            idempotence_broken = (ps, out, readjusted)
    if idempotence_broken:
        ps, out, readjusted = idempotence_broken
        failures.append(
            "not idempotent on already-adjusted sequences, e.g. "
            f"holm({[round(q, 3) for q in out]}) = {[round(q, 3) for q in readjusted]}"
        )
    ok = not failures
    line("holm_properties", ok, failures[0] if failures else "")
    assert not failures, failures


# ------------------------------------------------- 7. classifier sanity


def test_criterion_classifier_sanity():
    rng = np.random.default_rng(777)
    classes = ("HC", "PD", "CP", "ALS", "DS", "Stroke")

    # Planted templates with inter-centroid distance >= 10 sigma.
    rows = []
    for i, c in enumerate(classes):
        template = np.zeros(5)
        if i < 5:
            template[i] = 10.0
        for k in range(15):
            cons = template + rng.normal(0, 1.0, 5)
            rows.append(
                consonant_row(
                    f"{c}-{k}", list(map(float, cons)), aetiology=c,
                    dataset=("d1", "d2")[k % 2], severity="unknown",
                )
            )
    planted = centroid_classifier_lodo(ProfileTable(rows), seed=0)
    macro_f1 = planted.tables["metrics"].get("macro_f1", "value")

    balanced = []
    for rep in range(50):
        rows = []
        labels = [c for c in classes for _ in range(12)]
        labels = list(rng.permutation(labels))
        for k, lab in enumerate(labels):
            rows.append(
                consonant_row(
                    f"s{k}", list(map(float, rng.normal(0, 1, 5))), aetiology=lab,
                    dataset=("d1", "d2")[k % 2], severity="unknown",
                )
            )
        rep_out = centroid_classifier_lodo(ProfileTable(rows), seed=rep)
        balanced.append(rep_out.tables["metrics"].get("balanced_accuracy", "value"))
    mean_balanced = float(np.mean(balanced))

    ok = macro_f1 > 0.95 and abs(mean_balanced - 1 / 6) <= 0.05
    line(
        "classifier_sanity",
        ok,
        f"macro_f1={macro_f1:.3f}, shuffled balanced acc={mean_balanced:.3f}",
    )
    assert macro_f1 > 0.95
    assert abs(mean_balanced - 1 / 6) <= 0.05


# ------------------------------------------------- 8. permutation-null calibration


def test_criterion_permutation_null_calibration():
    p_values = []
    for rep in range(200):
        rng = np.random.default_rng(10_000 + rep)
        rows = []
        for lang in ("en", "es"):
            for aet in ("PD", "CP"):
                for k in range(8):
                    cons = list(map(float, rng.normal(2.0, 0.5, 5)))
                    rows.append(
                        consonant_row(
                            f"{lang}-{aet}-{k}", cons, aetiology=aet,
                            language=lang, severity="unknown",
                        )
                    )
            for k in range(3):
                cons = list(map(float, rng.normal(2.0, 0.5, 5)))
                rows.append(
                    consonant_row(
                        f"{lang}-HC-{k}", cons, aetiology="HC",
                        language=lang, severity="control",
                    )
                )
        report = crosslingual_consistency(
            ProfileTable(rows), aetiologies=("PD",), min_n=3,
            n_boot=100, n_perm=199, seed=rep,
        )
        p_values.append(report.tables["summary"].get("PD", "perm_p"))
    ks = scipy_stats.kstest(p_values, "uniform")
    ok = ks.pvalue > 0.01
    line("permutation_null_calibration", ok, f"KS p={ks.pvalue:.3f} over 200 replicates")
    assert ks.pvalue > 0.01


# ------------------------------------------------- 9. interchange round-trip


def test_criterion_interchange_roundtrip(tmp_path):
    spec = SynthSpec(speakers_per_cell=2, seed=77)
    generate_corpus(spec, tmp_path / "a")
    corpus = read_corpus(tmp_path / "a", spec.backbone_id)
    write_corpus(corpus, tmp_path / "b")
    corpus2 = read_corpus(tmp_path / "b", spec.backbone_id)
    write_corpus(corpus2, tmp_path / "c")
    rel = f"embeddings/{spec.backbone_id}/embeddings.phem"
    phem_identical = (
        (tmp_path / "a" / rel).read_bytes()
        == (tmp_path / "b" / rel).read_bytes()
        == (tmp_path / "c" / rel).read_bytes()
    )

    rng = np.random.default_rng(99)
    crashes = 0
    for _ in range(600):
        start = int(rng.integers(0, len(MINIMAL)))
        length = int(rng.integers(0, 40))
        insert = "".join(chr(c) for c in rng.integers(32, 127, size=rng.integers(0, 8)))
        mutated = MINIMAL[:start] + insert + MINIMAL[start + length :]
        try:
            parse_textgrid(mutated)
        except TextGridError:
            pass
        except Exception:
            crashes += 1
    for _ in range(200):
        blob = bytes(rng.integers(0, 256, size=rng.integers(0, 300))).decode(
            "latin-1", errors="ignore"
        )
        try:
            parse_textgrid(blob)
        except TextGridError:
            pass
        except Exception:
            crashes += 1

    ok = phem_identical and crashes == 0
    line("interchange_roundtrip", ok, f"crashes={crashes}")
    assert phem_identical
    assert crashes == 0


# ------------------------------------------------- 10. residualization identity


def test_criterion_residualization_identity():
    rng = np.random.default_rng(606)
    worst_corr = worst_sum = 0.0
    for _ in range(100):
        n = int(rng.integers(10, 60))
        x = rng.normal(size=n)
        y = 2.0 * x + rng.normal(size=n)
        r = residualize(y, x)
        worst_sum = max(worst_sum, abs(float(r.sum())))
        worst_corr = max(worst_corr, abs(float(np.corrcoef(r, x)[0, 1])))

    spec = SynthSpec(
        languages=("en",),
        datasets=("synthA", "synthB"),
        speakers_per_cell=6,
        seed=55,
        token_severity_coupling=1.5,
        token_count_log_mean=6.2,
        severity_jitter=0.05,
    )
    corpus, _ = generate_corpus(spec)
    fc = make_feature_config("en")
    directions = {"en": estimate_directions(corpus, "en", fc)}
    table = assemble_profiles(corpus, directions, {"en": fc})
    report = residualized_rankings(table)
    verdicts = report.tables["verdicts"]
    preserved = [
        verdicts.get(f, "aetiology_order_preserved")
        for f in CONSONANTS + ("composite_consonant_dprime",)
    ]

    ok = worst_corr < 1e-9 and worst_sum < 1e-9 and all(v == 1.0 for v in preserved)
    line(
        "residualization_identity",
        ok,
        f"max|corr|={worst_corr:.1e}, max|sum|={worst_sum:.1e}, preserved={preserved}",
    )
    assert worst_corr < 1e-9
    assert worst_sum < 1e-9
    assert all(v == 1.0 for v in preserved)


# ------------------------------------------------- supplementary scale smoke


def test_scale_smoke_3000_speakers():
    spec = SynthSpec(
        speakers_per_cell=215,
        seed=2,
        dim=12,
        token_count_log_mean=4.75,
        token_count_min=105,
    )
    corpus, _ = generate_corpus(spec)
    assert len(corpus.manifest.speakers) >= 3000
    fc = make_feature_config("en")
    t0 = time.time()
    directions = {"en": estimate_directions(corpus, "en", fc)}
    table = assemble_profiles(corpus, directions, {"en": fc})
    elapsed = time.time() - t0
    line("scale_smoke_3000_speakers", elapsed < 60.0, f"{elapsed:.1f}s for {len(table)} rows")
    assert len(table) == len(corpus.manifest.speakers)
    assert elapsed < 60.0
