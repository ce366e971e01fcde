import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phonoscope.errors import (
    MalformedHeader,
    NonMonotoneIntervals,
    TextGridError,
    TruncatedTier,
)
from phonoscope.textgrid import Interval, IntervalTier, TierSet, format_textgrid, parse_textgrid

MINIMAL = """File type = "ooTextFile"
Object class = "TextGrid"

xmin = 0
xmax = 0.25
tiers? <exists>
size = 1
item []:
    item [1]:
        class = "IntervalTier"
        name = "phones"
        xmin = 0
        xmax = 0.25
        intervals: size = 1
        intervals [1]:
            xmin = 0.00
            xmax = 0.25
            text = "a"
"""


def test_minimal_single_interval():
    ts = parse_textgrid(MINIMAL)
    assert len(ts.tiers) == 1
    tier = ts.tier("phones")
    assert tier is not None
    assert len(tier.intervals) == 1
    iv = tier.intervals[0]
    assert (iv.xmin, iv.xmax, iv.label) == (0.0, 0.25, "a")


def test_empty_tier():
    text = MINIMAL.replace("intervals: size = 1", "intervals: size = 0")
    text = text[: text.index("        intervals [1]:")]
    ts = parse_textgrid(text)
    assert ts.tier("phones").intervals == ()


def test_wrong_magic_line():
    with pytest.raises(MalformedHeader):
        parse_textgrid("WRONG\n" + MINIMAL.split("\n", 1)[1])


def test_empty_labels_are_kept():
    text = MINIMAL.replace('text = "a"', 'text = ""')
    ts = parse_textgrid(text)
    assert ts.tier("phones").intervals[0].label == ""


def test_quote_escaping():
    text = MINIMAL.replace('text = "a"', 'text = "say ""hi"""')
    ts = parse_textgrid(text)
    assert ts.tier("phones").intervals[0].label == 'say "hi"'


def test_truncated_tier():
    text = MINIMAL.replace("intervals: size = 1", "intervals: size = 2")
    with pytest.raises(TruncatedTier):
        parse_textgrid(text)


def test_zero_length_interval_rejected():
    text = MINIMAL.replace("xmax = 0.25\n            text", "xmax = 0.00\n            text")
    with pytest.raises(NonMonotoneIntervals):
        parse_textgrid(text)


def test_overlapping_intervals_rejected():
    tier = IntervalTier(
        name="phones",
        xmin=0.0,
        xmax=1.0,
        intervals=(Interval(0.0, 0.6, "a"), Interval(0.5, 1.0, "b")),
    )
    text = format_textgrid(TierSet(0.0, 1.0, (tier,)))
    with pytest.raises(NonMonotoneIntervals):
        parse_textgrid(text)


def test_multiple_tiers_roundtrip():
    phones = IntervalTier(
        "phones", 0.0, 1.0, (Interval(0.0, 0.5, "a"), Interval(0.5, 1.0, "b"))
    )
    words = IntervalTier("words", 0.0, 1.0, (Interval(0.0, 1.0, "ab"),))
    ts = TierSet(0.0, 1.0, (phones, words))
    parsed = parse_textgrid(format_textgrid(ts))
    assert parsed == ts


def test_point_tiers_are_skipped():
    text = """File type = "ooTextFile"
Object class = "TextGrid"
xmin = 0
xmax = 1
tiers? <exists>
size = 2
item []:
    item [1]:
        class = "TextTier"
        name = "events"
        xmin = 0
        xmax = 1
        points: size = 1
        points [1]:
            number = 0.5
            mark = "click"
    item [2]:
        class = "IntervalTier"
        name = "phones"
        xmin = 0
        xmax = 1
        intervals: size = 1
        intervals [1]:
            xmin = 0
            xmax = 1
            text = "a"
"""
    ts = parse_textgrid(text)
    assert [t.name for t in ts.tiers] == ["phones"]


@settings(max_examples=300, deadline=None)
@given(st.text(max_size=400))
def test_fuzz_arbitrary_text_never_crashes(text):
    try:
        parse_textgrid(text)
    except TextGridError:
        pass


@settings(max_examples=300, deadline=None)
@given(
    st.integers(min_value=0, max_value=len(MINIMAL) - 1),
    st.integers(min_value=1, max_value=40),
    st.text(max_size=10),
)
def test_fuzz_mutated_fixture_never_crashes(start, length, insert):
    mutated = MINIMAL[:start] + insert + MINIMAL[start + length :]
    try:
        parse_textgrid(mutated)
    except TextGridError:
        pass
