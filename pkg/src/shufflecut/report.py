"""Result containers for the command-line experiments.

A report is a table plus a list of named pass/fail verdicts.  Files are
written atomically (temp file + rename) so partially written output is never
observable, and every file embeds the package version and the parameters that
produced it.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from ._version import __version__

__all__ = ["Verdict", "ExperimentReport", "atomic_write_text"]


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."),
                               prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _native(value):
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, Fraction):
        return str(value)
    return value


def _cell(value) -> str:
    value = _native(value)
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


@dataclass(frozen=True)
class Verdict:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}" + (f": {self.detail}" if self.detail else "")


@dataclass
class ExperimentReport:
    name: str
    params: dict
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)
    verdicts: list[Verdict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def add_row(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError("row width differs from the declared columns")
        self.rows.append(tuple(_native(v) for v in values))

    def add_verdict(self, name: str, passed: bool, detail: str = "") -> None:
        self.verdicts.append(Verdict(name=name, passed=bool(passed), detail=detail))

    def summary_lines(self) -> list[str]:
        lines = [f"experiment: {self.name}"]
        for key in sorted(self.params):
            lines.append(f"  {key} = {self.params[key]}")
        lines.append(f"  rows: {len(self.rows)}")
        for v in self.verdicts:
            lines.append("  " + v.line())
        lines.append(f"result: {'PASS' if self.passed else 'FAIL'}")
        return lines

    def to_csv(self, path: str | Path) -> None:
        buf = io.StringIO()
        buf.write(f"# experiment: {self.name}\n")
        buf.write(f"# version: {__version__}\n")
        for key in sorted(self.params):
            buf.write(f"# {key}: {self.params[key]}\n")
        for v in self.verdicts:
            buf.write(f"# verdict {v.name}: {'PASS' if v.passed else 'FAIL'}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_cell(v) for v in row])
        atomic_write_text(path, buf.getvalue())

    def to_json(self, path: str | Path) -> None:
        payload = {
            "experiment": self.name,
            "version": __version__,
            "params": {k: _native(v) for k, v in self.params.items()},
            "columns": list(self.columns),
            "rows": [[_native(v) for v in row] for row in self.rows],
            "verdicts": [{"name": v.name, "passed": v.passed, "detail": v.detail}
                         for v in self.verdicts],
            "passed": self.passed,
        }
        atomic_write_text(path, json.dumps(payload, indent=2, default=str) + "\n")
