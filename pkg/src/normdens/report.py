"""Machine-readable experiment reports (JSON and CSV).

Numbers are rounded to 12 significant digits when they enter a report, so the
JSON and CSV renderings carry the same values and a parsed report compares
equal to the one that was written.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from importlib import metadata

CSV_COLUMNS = ("command", "name", "value", "std_error", "trials", "seed", "runtime_s")
SIG_DIGITS = 12


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def round_sig(x: float, digits: int = SIG_DIGITS) -> float:
    x = float(x)
    if not math.isfinite(x) or x == 0.0:
        return x
    return float(f"{x:.{digits}g}")


def fmt(x: float, digits: int = SIG_DIGITS) -> str:
    return f"{float(x):.{digits}g}"


def _clean(obj):
    """Round every float inside nested containers; tuples become lists (as JSON would)."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return round_sig(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "tolist"):
        return _clean(obj.tolist())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


@dataclass
class ResultEntry:
    name: str
    value: float
    std_error: float = 0.0
    trials: int = 0

    def __post_init__(self):
        self.value = round_sig(self.value)
        self.std_error = round_sig(self.std_error)
        self.trials = int(self.trials)


@dataclass
class ExperimentReport:
    command: str
    seed: int
    inputs: dict = field(default_factory=dict)
    results: list[ResultEntry] = field(default_factory=list)
    runtime_s: float = 0.0
    version: str = field(default_factory=tool_version)
    passed: bool | None = None

    def __post_init__(self):
        self.inputs = _clean(self.inputs)
        self.runtime_s = round_sig(self.runtime_s)

    def add(self, name: str, value: float, std_error: float = 0.0, trials: int = 0) -> ResultEntry:
        entry = ResultEntry(name, value, std_error, trials)
        self.results.append(entry)
        return entry

    def __getitem__(self, name: str) -> ResultEntry:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "seed": self.seed,
            "inputs": _clean(self.inputs),
            "results": [
                {"name": r.name, "value": r.value, "std_error": r.std_error, "trials": r.trials}
                for r in self.results
            ],
            "runtime_s": self.runtime_s,
            "version": self.version,
            "passed": self.passed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentReport":
        return cls(
            command=doc["command"],
            seed=doc["seed"],
            inputs=doc.get("inputs", {}),
            results=[ResultEntry(**r) for r in doc.get("results", [])],
            runtime_s=doc.get("runtime_s", 0.0),
            version=doc.get("version", tool_version()),
            passed=doc.get("passed"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.results:
            w.writerow([self.command, r.name, fmt(r.value), fmt(r.std_error), r.trials, self.seed, fmt(self.runtime_s)])
        return buf.getvalue()

    def render(self, fmt_name: str) -> str:
        if fmt_name == "json":
            return self.to_json()
        if fmt_name == "csv":
            return self.to_csv()
        raise ValueError(f"unknown format {fmt_name!r}")


def read_csv(text: str) -> list[dict]:
    """Parse CSV output back into typed rows."""
    rows = []
    for row in csv.DictReader(io.StringIO(text)):
        rows.append(
            {
                "command": row["command"],
                "name": row["name"],
                "value": float(row["value"]),
                "std_error": float(row["std_error"]),
                "trials": int(row["trials"]),
                "seed": int(row["seed"]),
                "runtime_s": float(row["runtime_s"]),
            }
        )
    return rows
