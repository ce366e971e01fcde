"""Typed analysis reports and their CSV/JSON/markdown serialization.

A report is a set of named grids plus parameters, findings and the seed it
was produced with. Serialization is deterministic: rerunning an analysis
with the same inputs and seed yields byte-identical JSON and CSV.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class Grid:
    rows: list[str]
    cols: list[str]
    values: list[list[float | None]]

    def __post_init__(self) -> None:
        if len(self.values) != len(self.rows):
            raise ValueError("grid values do not match row labels")
        for row in self.values:
            if len(row) != len(self.cols):
                raise ValueError("grid values do not match column labels")
        self.values = [
            [None if v is None else float(v) for v in row] for row in self.values
        ]

    @classmethod
    def from_dict(
        cls, rows: list[str], cols: list[str], data: dict[tuple[str, str], float | None]
    ) -> "Grid":
        values = [[data.get((r, c)) for c in cols] for r in rows]
        return cls(rows=list(rows), cols=list(cols), values=values)

    def get(self, row: str, col: str) -> float | None:
        return self.values[self.rows.index(row)][self.cols.index(col)]


@dataclass
class AnalysisReport:
    analysis_id: str
    parameters: dict
    seed: int
    tables: dict[str, Grid] = field(default_factory=dict)
    findings: list[str] = field(default_factory=list)

    def add_table(self, name: str, grid: Grid) -> None:
        self.tables[name] = grid

    def to_json_dict(self) -> dict:
        return {
            "analysis_id": self.analysis_id,
            "parameters": self.parameters,
            "seed": self.seed,
            "findings": self.findings,
            "tables": {
                name: {"rows": g.rows, "cols": g.cols, "values": g.values}
                for name, g in self.tables.items()
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "AnalysisReport":
        doc = json.loads(text)
        report = cls(
            analysis_id=doc["analysis_id"],
            parameters=doc["parameters"],
            seed=doc["seed"],
            findings=list(doc["findings"]),
        )
        for name, g in doc["tables"].items():
            report.tables[name] = Grid(rows=g["rows"], cols=g["cols"], values=g["values"])
        return report

    def table_csv(self, name: str) -> str:
        grid = self.tables[name]
        lines = [",".join(["row"] + grid.cols)]
        for label, row in zip(grid.rows, grid.values):
            cells = [label] + ["" if v is None else repr(float(v)) for v in row]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def to_markdown(self, version: str | None = None) -> str:
        out = [f"# {self.analysis_id}", ""]
        if version:
            out.append(f"Produced by phonoscope {version}, seed {self.seed}.")
        else:
            out.append(f"Seed {self.seed}.")
        out.append("")
        if self.parameters:
            out.append("Parameters: " + json.dumps(self.parameters, sort_keys=True))
            out.append("")
        for name, grid in self.tables.items():
            out.append(f"## {name}")
            out.append("")
            out.append("| row | " + " | ".join(grid.cols) + " |")
            out.append("|" + "---|" * (len(grid.cols) + 1))
            for label, row in zip(grid.rows, grid.values):
                cells = [("" if v is None else f"{v:.6g}") for v in row]
                out.append("| " + " | ".join([label] + cells) + " |")
            out.append("")
        if self.findings:
            out.append("## findings")
            out.append("")
            out.extend(f"- {f}" for f in self.findings)
            out.append("")
        return "\n".join(out)


def write_report(report: AnalysisReport, out_dir: str | Path, version: str | None = None) -> list[Path]:
    """Write ``<id>.json``, ``<id>.md`` and one CSV per table; returns paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    json_path = out_dir / f"{report.analysis_id}.json"
    json_path.write_text(report.to_json(), encoding="utf-8")
    written.append(json_path)
    md_path = out_dir / f"{report.analysis_id}.md"
    md_path.write_text(report.to_markdown(version), encoding="utf-8")
    written.append(md_path)
    for name in report.tables:
        csv_path = out_dir / f"{report.analysis_id}.{name}.csv"
        csv_path.write_text(report.table_csv(name), encoding="utf-8")
        written.append(csv_path)
    return written
