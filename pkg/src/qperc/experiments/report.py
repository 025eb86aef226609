"""Experiment reports: one canonical CSV plus a JSON sidecar."""
from __future__ import annotations

import csv
import io
import json
import platform
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import ExperimentConfig


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


@dataclass
class ExperimentReport:
    """Rows of measured values with the bound each is compared against.

    ``summary`` holds aggregate quantities; ``wall_clock`` is kept out of
    the CSV so that reruns are byte-identical.
    """

    config: ExperimentConfig
    columns: list
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    wall_clock: float = 0.0
    extra_files: list = field(default_factory=list)

    @property
    def name(self) -> str:
        return self.config.experiment

    def add(self, **row) -> None:
        missing = set(self.columns) - set(row)
        unknown = set(row) - set(self.columns)
        if missing or unknown:
            raise KeyError(f"row mismatch: missing {sorted(missing)}, unknown {sorted(unknown)}")
        self.rows.append(row)

    def column(self, name, **where) -> np.ndarray:
        sel = [r for r in self.rows if all(r[k] == v for k, v in where.items())]
        return np.array([r[name] for r in sel])

    def select(self, **where) -> list:
        return [r for r in self.rows if all(r[k] == v for k, v in where.items())]

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_cell(r[c]) for c in self.columns])
        return buf.getvalue()

    def meta(self) -> dict:
        return {
            "experiment": self.name,
            "config": _jsonable(self.config.to_dict()),
            "summary": _jsonable(self.summary),
            "wall_clock_seconds": self.wall_clock,
            "budget_seconds": self.config.get("budget_seconds"),
            "rng": {"bit_generator": "PCG64", "seed": self.config.seed,
                    "numpy": np.__version__},
            "python": platform.python_version(),
            "extra_files": [str(p) for p in self.extra_files],
        }

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{self.name}.csv"
        path.write_text(self.csv_text())
        (out / f"{self.name}.meta.json").write_text(json.dumps(self.meta(), indent=2) + "\n")
        return path
