"""Parser for long-form ("ooTextFile") Praat TextGrids.

Only the long text format with IntervalTier entries is supported, which is
what forced aligners emit. Short-form and binary TextGrids are rejected with
a typed error. Point tiers (``TextTier``) are skipped. Empty-label intervals
are kept: they encode silences and pauses.

The parser is total: any input either yields a :class:`TierSet` or raises a
:class:`~phonoscope.errors.TextGridError` subclass, never anything else.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import (
    MalformedHeader,
    MalformedTextGrid,
    NonMonotoneIntervals,
    TextGridError,
    TruncatedTier,
)

_MAGIC = 'File type = "ooTextFile"'
_OBJECT = 'Object class = "TextGrid"'

_NUM_RE = re.compile(r"=\s*(-?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*$")
_STR_RE = re.compile(r'=\s*"((?:[^"]|"")*)"\s*$')
_ITEM_RE = re.compile(r"^item\s*\[\d+\]\s*:?\s*$")
_INTERVAL_HDR_RE = re.compile(r"^intervals\s*\[\d+\]\s*:?\s*$")
_POINT_HDR_RE = re.compile(r"^points\s*\[\d+\]\s*:?\s*$")


@dataclass(frozen=True)
class Interval:
    xmin: float
    xmax: float
    label: str

    @property
    def duration(self) -> float:
        return self.xmax - self.xmin


@dataclass(frozen=True)
class IntervalTier:
    name: str
    xmin: float
    xmax: float
    intervals: tuple[Interval, ...]


@dataclass(frozen=True)
class TierSet:
    xmin: float
    xmax: float
    tiers: tuple[IntervalTier, ...]

    def tier(self, name: str) -> IntervalTier | None:
        """First tier with the given name, or None."""
        for t in self.tiers:
            if t.name == name:
                return t
        return None


class _Lines:
    """Cursor over stripped, non-blank lines."""

    def __init__(self, text: str):
        self.lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        self.pos = 0

    def peek(self) -> str | None:
        return self.lines[self.pos] if self.pos < len(self.lines) else None

    def next(self) -> str:
        line = self.peek()
        if line is None:
            raise MalformedTextGrid("unexpected end of file")
        self.pos += 1
        return line

    def expect_number(self, key: str) -> float:
        line = self.next()
        if not line.startswith(key):
            raise MalformedTextGrid(f"expected '{key} = <number>', got {line!r}")
        m = _NUM_RE.search(line)
        if m is None:
            raise MalformedTextGrid(f"unparseable number in {line!r}")
        return float(m.group(1))

    def expect_string(self, key: str) -> str:
        line = self.next()
        if not line.startswith(key):
            raise MalformedTextGrid(f"expected '{key} = \"...\"', got {line!r}")
        m = _STR_RE.search(line)
        if m is None:
            raise MalformedTextGrid(f"unparseable string in {line!r}")
        return m.group(1).replace('""', '"')


def parse_textgrid(text: str) -> TierSet:
    """Parse a long-form TextGrid document into its interval tiers.

    Raises MalformedHeader if the magic lines are wrong, TruncatedTier if a
    tier declares more intervals than are present, NonMonotoneIntervals for
    zero/negative-length or overlapping intervals, and MalformedTextGrid for
    any other structural problem.
    """
    try:
        return _parse(text)
    except TextGridError:
        raise
    except Exception as exc:  # totality: no foreign exceptions escape
        raise MalformedTextGrid(f"unparseable TextGrid: {exc}") from exc


def _parse(text: str) -> TierSet:
    cur = _Lines(text)
    if cur.peek() != _MAGIC:
        raise MalformedHeader(f"first line must be {_MAGIC!r}")
    cur.next()
    if cur.peek() != _OBJECT:
        raise MalformedHeader(f"second line must be {_OBJECT!r}")
    cur.next()

    xmin = cur.expect_number("xmin")
    xmax = cur.expect_number("xmax")
    line = cur.next()
    if not line.startswith("tiers?"):
        raise MalformedTextGrid(f"expected 'tiers? <exists>', got {line!r}")
    n_tiers = int(cur.expect_number("size"))
    if n_tiers < 0:
        raise MalformedTextGrid("negative tier count")
    if cur.peek() == "item []:":
        cur.next()

    tiers: list[IntervalTier] = []
    for _ in range(n_tiers):
        line = cur.next()
        if not _ITEM_RE.match(line):
            raise MalformedTextGrid(f"expected 'item [k]:', got {line!r}")
        klass = cur.expect_string("class")
        if klass == "IntervalTier":
            tiers.append(_parse_interval_tier(cur))
        elif klass == "TextTier":
            _skip_point_tier(cur)
        else:
            raise MalformedTextGrid(f"unsupported tier class {klass!r}")
    return TierSet(xmin=xmin, xmax=xmax, tiers=tuple(tiers))


def _parse_interval_tier(cur: _Lines) -> IntervalTier:
    name = cur.expect_string("name")
    xmin = cur.expect_number("xmin")
    xmax = cur.expect_number("xmax")
    line = cur.next()
    m = _NUM_RE.search(line)
    if not line.startswith("intervals: size") or m is None:
        raise MalformedTextGrid(f"expected 'intervals: size = N', got {line!r}")
    declared = int(float(m.group(1)))
    if declared < 0:
        raise MalformedTextGrid("negative interval count")

    intervals: list[Interval] = []
    for _ in range(declared):
        line = cur.peek()
        if line is None or not _INTERVAL_HDR_RE.match(line):
            raise TruncatedTier(
                f"tier {name!r} declares {declared} intervals, found {len(intervals)}"
            )
        cur.next()
        ixmin = cur.expect_number("xmin")
        ixmax = cur.expect_number("xmax")
        label = cur.expect_string("text")
        if ixmax <= ixmin:
            raise NonMonotoneIntervals(
                f"tier {name!r}: interval [{ixmin}, {ixmax}] has xmax <= xmin"
            )
        if intervals and ixmin < intervals[-1].xmax - 1e-9:
            raise NonMonotoneIntervals(
                f"tier {name!r}: interval starting at {ixmin} overlaps previous"
            )
        intervals.append(Interval(ixmin, ixmax, label))
    return IntervalTier(name=name, xmin=xmin, xmax=xmax, intervals=tuple(intervals))


def _skip_point_tier(cur: _Lines) -> None:
    cur.expect_string("name")
    cur.expect_number("xmin")
    cur.expect_number("xmax")
    line = cur.next()
    m = _NUM_RE.search(line)
    if not line.startswith("points: size") or m is None:
        raise MalformedTextGrid(f"expected 'points: size = N', got {line!r}")
    declared = int(float(m.group(1)))
    for _ in range(declared):
        line = cur.peek()
        if line is None or not _POINT_HDR_RE.match(line):
            raise TruncatedTier("point tier shorter than declared")
        cur.next()
        cur.expect_number("number")
        cur.expect_string("mark")


def format_textgrid(tiers: TierSet) -> str:
    """Render a TierSet back to long-form TextGrid text (test fixtures)."""
    out = [_MAGIC, _OBJECT, ""]
    out.append(f"xmin = {tiers.xmin:g}")
    out.append(f"xmax = {tiers.xmax:g}")
    out.append("tiers? <exists>")
    out.append(f"size = {len(tiers.tiers)}")
    out.append("item []:")
    for k, tier in enumerate(tiers.tiers, start=1):
        out.append(f"    item [{k}]:")
        out.append('        class = "IntervalTier"')
        out.append(f'        name = "{tier.name}"')
        out.append(f"        xmin = {tier.xmin:g}")
        out.append(f"        xmax = {tier.xmax:g}")
        out.append(f"        intervals: size = {len(tier.intervals)}")
        for i, iv in enumerate(tier.intervals, start=1):
            out.append(f"        intervals [{i}]:")
            out.append(f"            xmin = {iv.xmin:g}")
            out.append(f"            xmax = {iv.xmax:g}")
            escaped = iv.label.replace('"', '""')
            out.append(f'            text = "{escaped}"')
    return "\n".join(out) + "\n"
