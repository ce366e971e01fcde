import numpy as np
import pytest

from conftest import make_profile_row
from phonoscope.profiles import COMPOSITE, FULL15
from phonoscope.table import CSV_COLUMNS, ProfileTable


def small_table():
    rows = [
        make_profile_row(
            "hc1", aetiology="HC", severity="control",
            nasality=3.0, voicing=2.0, sonorance=2.5, stridency=3.5, manner=2.0,
            speech_rate=12.0,
        ),
        make_profile_row(
            "hc2", aetiology="HC", severity="control",
            nasality=1.0, voicing=2.0, sonorance=1.5, stridency=0.5, manner=2.0,
        ),
        make_profile_row(
            "pd1", aetiology="PD", severity="moderate",
            nasality=1.0, voicing=1.0, sonorance=1.0, stridency=1.0, manner=1.0,
        ),
        make_profile_row("sparse", aetiology="PD", severity="unknown"),
    ]
    return ProfileTable(rows)


def test_csv_header_matches_contract():
    header = ProfileTable([]).to_csv_text().splitlines()[0]
    assert header.split(",") == list(CSV_COLUMNS)
    assert header.split(",")[:8] == [
        "speaker_id", "backbone_id", "dataset", "language",
        "aetiology", "severity", "severity_source", "n_phones",
    ]
    assert header.split(",")[-1] == COMPOSITE


def test_csv_roundtrip():
    table = small_table()
    back = ProfileTable.from_csv_text(table.to_csv_text())
    assert len(back) == len(table)
    by_id = {r.profile.speaker_id: r for r in back.rows}
    for row in table.rows:
        twin = by_id[row.profile.speaker_id]
        assert twin.meta.aetiology == row.meta.aetiology
        assert twin.meta.severity == row.meta.severity
        for f in FULL15:
            assert twin.get(f) == row.get(f)
        assert twin.get(COMPOSITE) == row.get(COMPOSITE)


def test_missing_values_are_empty_cells():
    table = small_table()
    text = table.to_csv_text()
    sparse_line = [ln for ln in text.splitlines() if ln.startswith("sparse,")][0]
    cells = sparse_line.split(",")
    assert all(c == "" for c in cells[8:])


def test_values_array():
    table = small_table()
    vals = table.values("nasality")
    assert np.isnan(vals[-1])
    assert vals[0] == 3.0


def test_hc_feature_means_pairwise_deletion():
    table = small_table()
    means = table.hc_feature_means("en")
    assert means["nasality"] == pytest.approx(2.0)
    assert means["speech_rate"] == pytest.approx(12.0)  # only hc1 has it
    assert means["vowel_triangle_area"] is None


def test_hc_normalization():
    table = small_table()
    pd_row = [r for r in table.rows if r.profile.speaker_id == "pd1"][0]
    assert table.hc_normalized(pd_row, "nasality") == pytest.approx(0.5)
    assert table.hc_normalized(pd_row, "vowel_triangle_area") is None


def test_complete_case():
    table = small_table()
    ok = table.complete_case(("nasality", "voicing"))
    assert {r.profile.speaker_id for r in ok} == {"hc1", "hc2", "pd1"}


def test_by_backbone_split():
    rows = [
        make_profile_row("s1", backbone_id="A", nasality=1.0),
        make_profile_row("s1", backbone_id="B", nasality=2.0),
    ]
    split = ProfileTable(rows).by_backbone()
    assert sorted(split) == ["A", "B"]
    assert len(split["A"]) == 1
