"""
CSV readers and writers for every file the commands produce or consume.

All files are UTF-8 with a mandatory header row and '.' decimals. MO and
eNodeB ids are 1-based. Best-effort demands are written as "BE", unassigned
eNodeBs as "none", undefined satisfied ratios as "n/a".
"""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from domain.types import NO_DEMAND, UNASSIGNED

BE = "BE"
NONE = "none"
NA = "n/a"

SUMMARY_COLUMNS = [
    "scheduler", "fairness_mean", "fairness_std", "rate_gbps_mean", "rate_gbps_std",
    "satisfied_mean", "satisfied_std",
]
SLOT_COLUMNS = [
    "replication", "slot", "scheduler", "mo", "rate_gbps", "demand_gbps",
    "assigned_sites", "fairness", "satisfied_ratio",
]
ASSIGNMENT_COLUMNS = ["enodeb_id", "mo_id"]
LAYOUT_COLUMNS = ["site_id", "x_km", "y_km", "label_demand", "label_ue"]
FIGURE_COLUMNS = ["scheduler", "mean", "std"]
TIMESERIES_COLUMNS = ["slot", "mo", "rate_gbps", "demand_gbps"]


class CsvFormatError(ValueError):
    """A CSV input that does not have the expected shape or content."""


def fmt(value):
    """Shortest round-tripping text for a float; integers stay integers."""
    if value is None:
        return NA
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def fmt_demand(value):
    return BE if value is None or math.isnan(value) else fmt(value)


def parse_demand(text):
    return NO_DEMAND if text.strip().upper() == BE else float(text)


def parse_optional(text):
    return None if text.strip() == NA else float(text)


def _open_writer(path):
    handle = Path(path).open("w", encoding="utf-8", newline="")
    return handle, csv.writer(handle, lineterminator="\n")


def _read_rows(path, columns=None):
    with Path(path).open(encoding="utf-8", newline="") as handle:
        rows = list(csv.reader(handle))
    if not rows:
        raise CsvFormatError(f"{path}: missing header row")
    header, body = [h.strip() for h in rows[0]], [r for r in rows[1:] if r]
    if columns is not None and header != columns:
        raise CsvFormatError(f"{path}: expected columns {columns}, found {header}")
    if columns is not None:
        for number, row in enumerate(body, start=1):
            if len(row) != len(columns):
                raise CsvFormatError(f"{path}: row {number} has {len(row)} fields, expected {len(columns)}")
    return header, body


# ---------------------------------------------------------------------------
# Simulation outputs
# ---------------------------------------------------------------------------
def write_summary(path, results):
    handle, writer = _open_writer(path)
    with handle:
        writer.writerow(SUMMARY_COLUMNS)
        for result in results:
            s = result.summary
            writer.writerow([
                result.scheduler, fmt(s.fairness_mean), fmt(s.fairness_std),
                fmt(s.rate_gbps_mean), fmt(s.rate_gbps_std),
                fmt(s.satisfied_mean), fmt(s.satisfied_std),
            ])


def read_summary(path):
    _, body = _read_rows(path, SUMMARY_COLUMNS)
    return [
        {
            "scheduler": row[0],
            "fairness_mean": float(row[1]),
            "fairness_std": float(row[2]),
            "rate_gbps_mean": float(row[3]),
            "rate_gbps_std": float(row[4]),
            "satisfied_mean": parse_optional(row[5]),
            "satisfied_std": parse_optional(row[6]),
        }
        for row in body
    ]


def write_slot_dump(path, results):
    """One row per (replication, slot, MO) across every scheduler result."""
    handle, writer = _open_writer(path)
    with handle:
        writer.writerow(SLOT_COLUMNS)
        for result in results:
            for replication in result.replications:
                for record in replication.records:
                    for i, rate in enumerate(record.per_mo_rate):
                        writer.writerow([
                            replication.replication, record.slot, result.scheduler, i + 1,
                            fmt(rate), fmt_demand(record.omega[i]), record.assigned_sites[i],
                            fmt(record.fairness), fmt(record.satisfied_ratio),
                        ])


def read_slot_dump(path):
    _, body = _read_rows(path, SLOT_COLUMNS)
    return [
        {
            "replication": int(row[0]),
            "slot": int(row[1]),
            "scheduler": row[2],
            "mo": int(row[3]),
            "rate_gbps": float(row[4]),
            "demand_gbps": parse_demand(row[5]),
            "assigned_sites": int(row[6]),
            "fairness": float(row[7]),
            "satisfied_ratio": parse_optional(row[8]),
        }
        for row in body
    ]


def write_figure_bars(path, rows):
    """rows: iterable of (scheduler, mean, std)."""
    handle, writer = _open_writer(path)
    with handle:
        writer.writerow(FIGURE_COLUMNS)
        for scheduler, mean, std in rows:
            writer.writerow([scheduler, fmt(mean), fmt(std)])


def read_figure_bars(path):
    _, body = _read_rows(path, FIGURE_COLUMNS)
    return [(row[0], parse_optional(row[1]), parse_optional(row[2])) for row in body]


def write_timeseries(path, records):
    handle, writer = _open_writer(path)
    with handle:
        writer.writerow(TIMESERIES_COLUMNS)
        for record in records:
            for i, rate in enumerate(record.per_mo_rate):
                writer.writerow([record.slot, i + 1, fmt(rate), fmt_demand(record.omega[i])])


def read_timeseries(path):
    _, body = _read_rows(path, TIMESERIES_COLUMNS)
    return [
        {"slot": int(r[0]), "mo": int(r[1]), "rate_gbps": float(r[2]), "demand_gbps": parse_demand(r[3])}
        for r in body
    ]


# ---------------------------------------------------------------------------
# Layout
# ---------------------------------------------------------------------------
def write_layout(path, layout):
    handle, writer = _open_writer(path)
    with handle:
        writer.writerow(LAYOUT_COLUMNS)
        for k, (x, y) in enumerate(layout.sites):
            writer.writerow([
                k + 1, fmt(x), fmt(y),
                layout.static_labels_demand[k] + 1, layout.static_labels_ue[k] + 1,
            ])


def read_layout(path):
    _, body = _read_rows(path, LAYOUT_COLUMNS)
    return [
        {
            "site_id": int(r[0]), "x_km": float(r[1]), "y_km": float(r[2]),
            "label_demand": int(r[3]), "label_ue": int(r[4]),
        }
        for r in body
    ]


# ---------------------------------------------------------------------------
# One-shot assignment
# ---------------------------------------------------------------------------
def read_rate_matrix(path):
    """
    Rates file: header ``mo_id,1,2,...,K`` then one row per MO in order,
    values in Gbps. Returns an (|MOs|, K) array.
    """
    header, body = _read_rows(path)
    if not header or header[0] != "mo_id" or len(header) < 2:
        raise CsvFormatError(f"{path}: header must be mo_id followed by eNodeB ids")
    n_sites = len(header) - 1
    rows = []
    for number, row in enumerate(body, start=1):
        if len(row) != n_sites + 1:
            raise CsvFormatError(f"{path}: row {number} has {len(row) - 1} rates, header declares {n_sites}")
        if int(row[0]) != number:
            raise CsvFormatError(f"{path}: row {number} is labelled MO {row[0]}")
        rows.append([float(v) for v in row[1:]])
    if not rows:
        raise CsvFormatError(f"{path}: no MO rows")
    R = np.array(rows, dtype=float)
    if (R < 0).any() or not np.isfinite(R).all():
        raise CsvFormatError(f"{path}: rates must be finite and non-negative")
    return R


def write_rate_matrix(path, R):
    handle, writer = _open_writer(path)
    with handle:
        writer.writerow(["mo_id"] + [str(k + 1) for k in range(R.shape[1])])
        for i, row in enumerate(R):
            writer.writerow([i + 1] + [fmt(v) for v in row])


def read_demands(path):
    """Demands file: ``mo_id,demand_gbps`` with "BE" for best-effort MOs."""
    _, body = _read_rows(path, ["mo_id", "demand_gbps"])
    omega = []
    for number, row in enumerate(body, start=1):
        if int(row[0]) != number:
            raise CsvFormatError(f"{path}: row {number} is labelled MO {row[0]}")
        omega.append(parse_demand(row[1]))
    return np.array(omega, dtype=float)


def write_demands(path, omega):
    handle, writer = _open_writer(path)
    with handle:
        writer.writerow(["mo_id", "demand_gbps"])
        for i, w in enumerate(omega):
            writer.writerow([i + 1, fmt_demand(w)])


def write_assignment(path, phi):
    handle, writer = _open_writer(path)
    with handle:
        writer.writerow(ASSIGNMENT_COLUMNS)
        for k, owner in enumerate(phi):
            writer.writerow([k + 1, NONE if owner == UNASSIGNED else int(owner) + 1])


def read_assignment(path):
    _, body = _read_rows(path, ASSIGNMENT_COLUMNS)
    return np.array(
        [UNASSIGNED if row[1].strip() == NONE else int(row[1]) - 1 for row in body],
        dtype=np.int64,
    )
