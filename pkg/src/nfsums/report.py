"""Report records and CSV/JSON emission with deterministic ordering."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path

FIELDNAMES = ["suite", "case", "value", "reference", "verdict", "runtime"]


@dataclass
class ReportRecord:
    suite: str
    case: str
    value: str
    reference: str
    verdict: str  # pass | fail | measured
    runtime: float

    @classmethod
    def check(cls, suite, case, residual, tolerance, runtime=0.0):
        return cls(
            suite=suite,
            case=case,
            value=f"{residual:.6e}",
            reference=f"<= {tolerance:.1e}",
            verdict="pass" if residual <= tolerance else "fail",
            runtime=round(runtime, 4),
        )

    @classmethod
    def measured(cls, suite, case, value, reference="", runtime=0.0):
        return cls(
            suite=suite,
            case=case,
            value=str(value),
            reference=str(reference),
            verdict="measured",
            runtime=round(runtime, 4),
        )


def sort_records(records):
    return sorted(records, key=lambda r: (r.suite, r.case))


def emit_report(records, out_dir, basename="report"):
    """Write CSV and JSON artifacts with identical content; returns paths.

    Artifacts must be byte-identical across reruns of the same config, so
    the wall-clock runtime is zeroed there (it stays on the console).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = sort_records(records)
    csv_path = out / f"{basename}.csv"
    rows = []
    for r in records:
        row = asdict(r)
        row["runtime"] = 0.0
        rows.append(row)
    with csv_path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=FIELDNAMES)
        w.writeheader()
        for row in rows:
            w.writerow(row)
    nested = {}
    for row in rows:
        nested.setdefault(row["suite"], []).append(
            {k: v for k, v in row.items() if k != "suite"}
        )
    json_path = out / f"{basename}.json"
    json_path.write_text(json.dumps(nested, indent=2, sort_keys=True) + "\n")
    return csv_path, json_path


def load_report_json(path):
    nested = json.loads(Path(path).read_text())
    records = []
    for suite, rows in nested.items():
        for row in rows:
            records.append(ReportRecord(suite=suite, **row))
    return sort_records(records)


def has_failure(records):
    return any(r.verdict == "fail" for r in records)
