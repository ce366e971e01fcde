import math

import numpy as np
import pytest

from conftest import build_corpus, tiny_feature_config
from phonoscope.corpus import SpeakerMeta, Token, Utterance
from phonoscope.errors import DegenerateVariance, EmptyFeatureClass, NoHealthyControls
from phonoscope.profiles import (
    CONSONANT5,
    FULL15,
    MAIN13,
    dprime,
    estimate_directions,
    prosodic_metrics,
    segmental_profile,
    structural_metrics,
)

# ---------------------------------------------------------------- dprime


def test_dprime_hand_value():
    assert dprime([2, 4], [0, 0]) == pytest.approx(3.0, abs=1e-12)


def test_dprime_identical_multisets():
    assert dprime([1, 2, 3], [3, 1, 2]) == 0.0


def test_dprime_degenerate_variance():
    with pytest.raises(DegenerateVariance):
        dprime([1, 1, 1], [0, 0, 0])


def test_dprime_antisymmetry(rng):
    for _ in range(25):
        a = rng.normal(size=8)
        b = rng.normal(size=11)
        assert dprime(a, b) == -dprime(b, a)


def test_dprime_scale_invariance(rng):
    a = rng.normal(2, 1, size=40)
    b = rng.normal(0, 1, size=40)
    assert dprime(3.7 * a, 3.7 * b) == pytest.approx(dprime(a, b), rel=1e-12)


def test_dprime_estimator_convergence(rng):
    # Planted two-Gaussian data: |mean estimate - delta| < 3 MC standard errors.
    for delta in (0.5, 2.0):
        for n in (20, 100, 1000):
            estimates = [
                dprime(rng.normal(delta, 1, n), rng.normal(0, 1, n)) for _ in range(50)
            ]
            se = np.std(estimates, ddof=1) / math.sqrt(50)
            assert abs(np.mean(estimates) - delta) < 3 * se


# ---------------------------------------------------------------- directions


def hc_two_cluster_corpus(v_pos, v_neg, n_per_class=6, dim=4):
    speakers = [SpeakerMeta("hc1", "ds1", "en", "HC", "control", "clinical")]
    phones = []
    t = 0.0
    for k in range(n_per_class):
        phones.append(("nasality_p", t, t + 0.1))
        t += 0.1
        phones.append(("nasality_n", t, t + 0.1))
        t += 0.1
    for feat in ("voicing", "sonorance", "stridency", "manner", "height", "lowness", "backness", "rounding"):
        phones.append((f"{feat}_p", t, t + 0.1))
        t += 0.1
        phones.append((f"{feat}_n", t, t + 0.1))
        t += 0.1

    def emb(s, u, o, label):
        if label == "nasality_p":
            return np.asarray(v_pos, dtype=float)
        if label == "nasality_n":
            return np.asarray(v_neg, dtype=float)
        return np.zeros(dim) + 0.001 * (o + 1)

    return build_corpus(speakers, {"hc1": [("u1", phones, [])]}, emb, dim=dim)


def test_direction_forced_by_definition():
    v_pos, v_neg = [1.0, 2.0, 0.0, 0.0], [0.0, 0.0, 1.0, 1.0]
    corpus = hc_two_cluster_corpus(v_pos, v_neg)
    ds = estimate_directions(corpus, "en", tiny_feature_config())
    delta = np.asarray(v_pos) - np.asarray(v_neg)
    expected = delta / np.linalg.norm(delta)
    assert ds.directions["nasality"] == pytest.approx(expected, abs=1e-6)
    assert np.linalg.norm(ds.directions["nasality"]) == pytest.approx(1.0, abs=1e-9)
    assert ds.hc_speaker_count == 1
    assert ds.hc_token_counts["nasality"] == (6, 6)


def test_no_healthy_controls():
    corpus = hc_two_cluster_corpus([1, 0, 0, 0], [0, 1, 0, 0])
    with pytest.raises(NoHealthyControls):
        estimate_directions(corpus, "fr", tiny_feature_config("fr"))


def test_empty_feature_class():
    speakers = [SpeakerMeta("hc1", "ds1", "en", "HC")]
    phones = [("nasality_p", 0.0, 0.1)]  # no other labels at all
    corpus = build_corpus(speakers, {"hc1": [("u1", phones, [])]}, lambda *a: np.ones(4))
    with pytest.raises(EmptyFeatureClass):
        estimate_directions(corpus, "en", tiny_feature_config())


def test_planted_direction_recovered_within_2_degrees(rng):
    # 1000 HC tokens per class, noise sigma = 0.1 * separation.
    dim = 16
    u = np.zeros(dim)
    u[3] = 1.0
    sep = 2.0
    pos = 0.5 * sep * u + rng.normal(0, 0.1 * sep, size=(1000, dim))
    neg = -0.5 * sep * u + rng.normal(0, 0.1 * sep, size=(1000, dim))
    delta = pos.mean(axis=0) - neg.mean(axis=0)
    w = delta / np.linalg.norm(delta)
    angle = math.degrees(math.acos(abs(float(w @ u))))
    assert angle < 2.0


# ---------------------------------------------------------------- segmental


class FakeDirections:
    def __init__(self, features, dim):
        self.directions = {}
        for i, f in enumerate(features):
            w = np.zeros(dim)
            w[i % dim] = 1.0
            self.directions[f] = w

    def matrix(self, features):
        return np.stack([self.directions[f] for f in features], axis=1)


def test_segmental_min_token_rule(rng):
    fc = tiny_feature_config()
    dim = 12
    ds = FakeDirections(list(fc.features), dim)
    labels = ["nasality_p"] * 5 + ["nasality_n"] * 5 + ["voicing_p"] * 4 + ["voicing_n"] * 9
    emb = rng.normal(size=(len(labels), dim))
    values, warnings = segmental_profile(labels, emb, ds, fc)
    assert values["nasality"] is not None
    assert values["voicing"] is None  # 4 < 5 pos tokens
    assert values["height"] is None
    assert warnings == []


def test_segmental_planted_separation(rng):
    # d' ~ 2.0 +/- 0.3 at 100 tokens per class along the true direction.
    fc = tiny_feature_config()
    dim = 12
    ds = FakeDirections(list(fc.features), dim)
    w = ds.directions["nasality"]
    labels = ["nasality_p"] * 100 + ["nasality_n"] * 100
    emb = rng.normal(size=(200, dim))
    emb[:100] += 2.0 * w  # separation 2 in units of sigma=1
    values, _ = segmental_profile(labels, emb, ds, fc)
    assert values["nasality"] == pytest.approx(2.0, abs=0.3)


def test_segmental_degenerate_propagates_as_missing():
    fc = tiny_feature_config()
    ds = FakeDirections(list(fc.features), 12)
    labels = ["nasality_p"] * 5 + ["nasality_n"] * 5
    emb = np.zeros((10, 12))
    values, warnings = segmental_profile(labels, emb, ds, fc)
    assert values["nasality"] is None
    assert any("degenerate" in w for w in warnings)


# ---------------------------------------------------------------- structural


def _utt(phones):
    return Utterance(
        "u1",
        tuple(Token(lab, 0.1 * i, 0.1 * (i + 1), row=i) for i, lab in enumerate(phones)),
        (),
    )


def test_structural_identical_embeddings():
    fc = tiny_feature_config()
    labels = ["a"] * 3 + ["i"] * 3 + ["u"] * 3
    emb = np.tile(np.array([1.0, 2.0, 0.0, 0.0]), (9, 1))
    out = structural_metrics((_utt(labels),), emb, fc)
    assert out["boundary_sharpness"] == pytest.approx(0.0, abs=1e-9)
    assert out["cross_position_cos"] == pytest.approx(1.0, abs=1e-9)
    assert out["vowel_triangle_area"] == pytest.approx(0.0, abs=1e-9)


def test_vowel_triangle_hand_value():
    fc = tiny_feature_config()
    labels = ["a"] * 3 + ["i"] * 3 + ["u"] * 3
    emb = np.zeros((9, 4))
    emb[3:6, 0] = 1.0  # i at (1, 0)
    emb[6:9, 1] = 1.0  # u at (0, 1)
    out = structural_metrics((_utt(labels),), emb, fc)
    assert out["vowel_triangle_area"] == pytest.approx(0.5, abs=1e-9)


def test_vowel_triangle_needs_three_tokens_each():
    fc = tiny_feature_config()
    labels = ["a"] * 3 + ["i"] * 3 + ["u"] * 2
    emb = np.random.default_rng(0).normal(size=(8, 4))
    out = structural_metrics((_utt(labels),), emb, fc)
    assert out["vowel_triangle_area"] is None


def test_boundary_sharpness_orthogonal_pairs():
    fc = tiny_feature_config()
    emb = np.zeros((3, 4))
    emb[0, 0] = 1.0
    emb[1, 1] = 1.0
    emb[2, 2] = 1.0
    out = structural_metrics((_utt(["x", "y", "z"]),), emb, fc)
    assert out["boundary_sharpness"] == pytest.approx(1.0, abs=1e-9)


def test_boundary_pairs_do_not_cross_utterances():
    fc = tiny_feature_config()
    emb = np.zeros((2, 4))
    emb[0, 0] = 1.0
    emb[1, 1] = 1.0
    u1 = Utterance("u1", (Token("x", 0.0, 0.1, row=0),), ())
    u2 = Utterance("u2", (Token("y", 0.0, 0.1, row=1),), ())
    out = structural_metrics((u1, u2), emb, fc)
    assert out["boundary_sharpness"] is None


def test_cross_position_macro_average():
    fc = tiny_feature_config()
    # Label "x": two identical tokens (cos 1). Label "y": two orthogonal (cos 0).
    emb = np.zeros((4, 4))
    emb[0, 0] = emb[1, 0] = 1.0
    emb[2, 1] = 1.0
    emb[3, 2] = 1.0
    out = structural_metrics((_utt(["x", "x", "y", "y"]),), emb, fc)
    assert out["cross_position_cos"] == pytest.approx(0.5, abs=1e-9)


def test_structural_scale_invariance(rng):
    fc = tiny_feature_config()
    labels = ["a"] * 4 + ["i"] * 4 + ["u"] * 4 + ["x"] * 3
    emb = rng.normal(size=(15, 4))
    base = structural_metrics((_utt(labels),), emb, fc)
    scaled = structural_metrics((_utt(labels),), 2.5 * emb, fc)
    assert scaled["boundary_sharpness"] == pytest.approx(base["boundary_sharpness"], rel=1e-9)
    assert scaled["cross_position_cos"] == pytest.approx(base["cross_position_cos"], rel=1e-9)
    assert scaled["vowel_triangle_area"] == pytest.approx(
        2.5**2 * base["vowel_triangle_area"], rel=1e-9
    )


# ---------------------------------------------------------------- prosodic


def test_speech_rate_forced():
    fc = tiny_feature_config()
    phones = tuple(Token("x", 0.2 * i, 0.2 * (i + 1), row=i) for i in range(10))
    utt = Utterance("u1", phones, ())
    out = prosodic_metrics((utt,), fc)
    assert out["speech_rate"] == pytest.approx(5.0, abs=1e-9)


def test_pause_rate_hand_value():
    fc = tiny_feature_config()
    # Word gaps 0.10, 0.20, 0.16 -> two of three exceed 150 ms.
    words = (
        Token("w1", 0.0, 1.0),
        Token("w2", 1.10, 2.0),
        Token("w3", 2.20, 3.0),
        Token("w4", 3.16, 4.0),
    )
    utt = Utterance("u1", (), words)
    out = prosodic_metrics((utt,), fc)
    assert out["pause_rate"] == pytest.approx(2 / 3, abs=1e-9)


def test_pause_rate_missing_without_word_tier():
    fc = tiny_feature_config()
    utt = Utterance("u1", (Token("x", 0.0, 0.1, row=0),), ())
    assert prosodic_metrics((utt,), fc)["pause_rate"] is None


def test_vowel_duration_cv_zero_when_equal():
    fc = tiny_feature_config()
    phones = tuple(Token("a", 0.2 * i, 0.2 * i + 0.1, row=i) for i in range(4))
    utt = Utterance("u1", phones, ())
    assert prosodic_metrics((utt,), fc)["vowel_duration_cv"] == pytest.approx(0.0, abs=1e-9)


def test_vowel_duration_cv_needs_two_vowels():
    fc = tiny_feature_config()
    utt = Utterance("u1", (Token("a", 0.0, 0.1, row=0), Token("x", 0.1, 0.2, row=1)), ())
    assert prosodic_metrics((utt,), fc)["vowel_duration_cv"] is None


# ---------------------------------------------------------------- selectors


def test_feature_subsets():
    assert len(FULL15) == 15
    assert len(MAIN13) == 13
    assert set(FULL15) - set(MAIN13) == {"boundary_sharpness", "cross_position_cos"}
    assert set(CONSONANT5) == {"nasality", "voicing", "sonorance", "stridency", "manner"}


def test_composite_requires_all_five(rng):
    from conftest import make_profile_row

    row = make_profile_row("s", nasality=1.0, voicing=1.0, sonorance=1.0, stridency=1.0)
    assert row.profile.composite_consonant_dprime is None
    row = make_profile_row(
        "s", nasality=1.0, voicing=2.0, sonorance=3.0, stridency=4.0, manner=5.0
    )
    assert row.profile.composite_consonant_dprime == pytest.approx(3.0)
