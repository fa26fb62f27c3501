"""Machine-readable verification reports: a JSON tree plus a flat CSV.

Reports are deterministic functions of (config, seed); the creation
timestamp is the single nondeterministic field and is kept isolated at the
top level of the tree so byte-level comparisons can strip it.
"""

from __future__ import annotations

import csv
import io
import json
import platform
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import backend

SCHEMA_VERSION = 1

CSV_COLUMNS = ["check", "n", "lambda", "gamma", "statistic", "tolerance", "order", "pass", "seed"]


@dataclass
class CheckRecord:
    """One verification check: statistic vs tolerance, plus provenance.

    ``passed`` is None for informational records, which never affect the
    suite exit status.
    """

    check: str
    n: int | None
    lam: float | None
    gamma: float | None
    statistic: float
    tolerance: float | None
    passed: bool | None
    seed: int | None
    order: float | None = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        self.n = None if self.n is None else int(self.n)
        self.lam = None if self.lam is None else float(self.lam)
        self.gamma = None if self.gamma is None else float(self.gamma)
        self.statistic = float(self.statistic)
        self.tolerance = None if self.tolerance is None else float(self.tolerance)
        self.passed = None if self.passed is None else bool(self.passed)
        self.seed = None if self.seed is None else int(self.seed)
        self.order = None if self.order is None else float(self.order)

    def to_row(self) -> list:
        return [
            self.check,
            _fmt(self.n),
            _fmt(self.lam),
            _fmt(self.gamma),
            _fmt(self.statistic),
            _fmt(self.tolerance),
            _fmt(self.order),
            _fmt(self.passed),
            _fmt(self.seed),
        ]

    def to_tree(self) -> dict:
        tree = {
            "check": self.check,
            "n": self.n,
            "lambda": self.lam,
            "gamma": self.gamma,
            "statistic": self.statistic,
            "tolerance": self.tolerance,
            "order": self.order,
            "pass": self.passed,
            "seed": self.seed,
        }
        if self.details:
            tree["details"] = _jsonable(self.details)
        return tree


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


@dataclass
class VerificationReport:
    """Aggregate of check records with the effective config that produced them."""

    records: list[CheckRecord]
    config: dict
    seed: int

    @property
    def n_pass(self) -> int:
        return sum(1 for r in self.records if r.passed is True)

    @property
    def n_fail(self) -> int:
        return sum(1 for r in self.records if r.passed is False)

    @property
    def n_info(self) -> int:
        return sum(1 for r in self.records if r.passed is None)

    def all_passed(self) -> bool:
        return self.n_fail == 0

    def failed(self) -> list[CheckRecord]:
        return [r for r in self.records if r.passed is False]

    def to_tree(self, timestamp: bool = True) -> dict:
        tree = {
            "schema_version": SCHEMA_VERSION,
            "seed": self.seed,
            "environment": {
                "python": sys.version.split()[0],
                "numpy": np.__version__,
                "platform": platform.platform(),
                "backend": backend.NAME,
            },
            "config": _jsonable(self.config),
            "summary": {
                "pass": self.n_pass,
                "fail": self.n_fail,
                "informational": self.n_info,
            },
            "records": [r.to_tree() for r in self.records],
        }
        if timestamp:
            tree["created_utc"] = datetime.now(timezone.utc).isoformat()
        return tree

    def to_json(self, timestamp: bool = True) -> str:
        return json.dumps(self.to_tree(timestamp=timestamp), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for rec in self.records:
            writer.writerow(rec.to_row())
        return buf.getvalue()

    def write(self, out_dir: str | Path) -> tuple[Path, Path]:
        """Write report.json and records.csv into out_dir; returns the paths."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        json_path = out / "report.json"
        csv_path = out / "records.csv"
        json_path.write_text(self.to_json(), encoding="utf-8")
        csv_path.write_text(self.to_csv(), encoding="utf-8")
        return json_path, csv_path
