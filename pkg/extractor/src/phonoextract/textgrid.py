"""Minimal long-form TextGrid reader for aligner output.

Returns the interval tiers needed by the extractor; labels are kept verbatim
(NFC normalization happens at token emission).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .errors import BadTextGrid

_NUM = re.compile(r"=\s*(-?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*$")
_STR = re.compile(r'=\s*"((?:[^"]|"")*)"\s*$')


@dataclass(frozen=True)
class Interval:
    xmin: float
    xmax: float
    label: str


def read_textgrid(path: str | Path) -> dict[str, list[Interval]]:
    """Parse interval tiers from a long-form TextGrid file."""
    lines = [
        ln.strip()
        for ln in Path(path).read_text(encoding="utf-8").splitlines()
        if ln.strip()
    ]
    if not lines or lines[0] != 'File type = "ooTextFile"':
        raise BadTextGrid(f"{path}: not a long-form TextGrid")
    tiers: dict[str, list[Interval]] = {}
    name: str | None = None
    xmin = xmax = None
    label_pending = False
    i = 0
    try:
        while i < len(lines):
            line = lines[i]
            if line.startswith("class ="):
                m = _STR.search(line)
                in_interval_tier = bool(m) and m.group(1) == "IntervalTier"
                name = None
                if in_interval_tier:
                    m2 = _STR.search(lines[i + 1])
                    if m2 is None:
                        raise BadTextGrid(f"{path}: tier without a name")
                    name = m2.group(1)
                    tiers[name] = []
                    i += 1
            elif name is not None and line.startswith("xmin ="):
                m = _NUM.search(line)
                if m:
                    xmin = float(m.group(1))
            elif name is not None and line.startswith("xmax ="):
                m = _NUM.search(line)
                if m:
                    xmax = float(m.group(1))
                    label_pending = True
            elif name is not None and label_pending and line.startswith("text ="):
                m = _STR.search(line)
                if m is None or xmin is None or xmax is None:
                    raise BadTextGrid(f"{path}: malformed interval near line {i}")
                if xmax <= xmin:
                    raise BadTextGrid(f"{path}: interval [{xmin}, {xmax}] not increasing")
                tiers[name].append(Interval(xmin, xmax, m.group(1).replace('""', '"')))
                label_pending = False
            i += 1
    except IndexError as exc:
        raise BadTextGrid(f"{path}: truncated file") from exc
    if not tiers:
        raise BadTextGrid(f"{path}: no interval tiers found")
    return tiers
